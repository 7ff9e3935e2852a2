#pragma once

#include "vtrack/command_protocol.hpp"
#include "vtrack/firmware.hpp"
#include "vtrack/gps_receiver.hpp"
#include "vtrack/gsm_modem.hpp"
#include "vtrack/location_reporter.hpp"
#include "vtrack/nmea.hpp"
#include "vtrack/scenario.hpp"
#include "vtrack/simulation.hpp"
#include "vtrack/transcript.hpp"
#include "vtrack/types.hpp"
#include "vtrack/vehicle_state.hpp"
