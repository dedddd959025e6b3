#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <string>

#include "spex/setfn.hpp"
#include "spex/spectrum.hpp"

namespace spex {

enum class SyntheticFamily { peak, complete_hierarchy, staircase };

SyntheticFamily parse_family(const std::string& s);
std::string to_string(SyntheticFamily f);

struct SyntheticSpec {
  SyntheticFamily family = SyntheticFamily::complete_hierarchy;
  std::size_t n = 64;
  std::size_t num_sets = 10;
  std::size_t cardinality = 5;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Value function that evaluates a Fourier spectrum exactly.
class SpectrumValueFunction final : public ValueFunction {
 public:
  explicit SpectrumValueFunction(FourierSpectrum spec) : spec_(std::move(spec)) {}
  std::size_t n() const override { return spec_.n(); }
  std::vector<double> query(std::span<const Mask> masks) const override;
  const FourierSpectrum& spectrum() const noexcept { return spec_; }

 private:
  FourierSpectrum spec_;
};

/// Ground-truth spectrum of a synthetic family.
///  peak: num_sets distinct sets of the given cardinality, F ~ U(-1,1).
///  complete_hierarchy: every subset of those sets, each with its own U(-1,1) draw.
///  staircase: {0} ⊂ {0,1} ⊂ ... up to the cardinality, unit coefficients.
FourierSpectrum synthetic_truth(const SyntheticSpec& spec);

struct Synthetic {
  std::shared_ptr<const SpectrumValueFunction> vf;
  FourierSpectrum truth;
};

Synthetic make_synthetic(const SyntheticSpec& spec);

}  // namespace spex
