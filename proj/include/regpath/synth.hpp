#pragma once
#include <cstdint>
#include <string>

#include <regpath/dataset.hpp>

namespace regpath {

enum class SynthKind { spline42, gauss_outlier };

SynthKind synth_kind_from_string(const std::string& name);

/// 0.125 + 0.125x - x^2 + 2(x-0.25)_+^2 - 2(x-0.5)_+^2 + 2(x-0.75)_+^2
double spline42_truth(double x);

/// spline42: 100 points, x ~ U(0,1), y ~ N(truth(x), 0.03^2), column "x".
/// gauss-outlier: two unit-variance classes around (-1,-1) (label -1) and
/// (1,1) (label +1), `per_class` points each, plus (30, 100) labeled -1;
/// columns "x1", "x2".
Dataset synth(SynthKind kind, std::uint64_t seed, int per_class = 50);

} // namespace regpath
