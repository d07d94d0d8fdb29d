#pragma once

#include "qspoof/error.hpp"
#include "qspoof/qmat.hpp"
#include "qspoof/detector.hpp"
#include "qspoof/analysis.hpp"
#include "qspoof/attacker.hpp"
#include "qspoof/radar.hpp"
#include "qspoof/harness.hpp"
