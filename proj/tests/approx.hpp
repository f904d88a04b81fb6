#pragma once

#include <doctest.h>

inline doctest::Approx rel(double v) { return doctest::Approx(v).scale(0.0); }
