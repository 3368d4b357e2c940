#pragma once

#include "config.hpp"
#include "delay_queue.hpp"
#include "dynamics.hpp"
#include "engine.hpp"
#include "exchange.hpp"
#include "harness.hpp"
#include "instrumentation.hpp"
#include "model.hpp"
#include "packet.hpp"
#include "partition.hpp"
#include "report.hpp"
#include "rng.hpp"
#include "transport.hpp"
