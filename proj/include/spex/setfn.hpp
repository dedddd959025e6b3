#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "spex/mask.hpp"

namespace spex {

struct Sample {
  Mask mask;
  double value = 0.0;
};

/// Ordered (mask, value) pairs over a universe of n features. Duplicates are
/// allowed; masks drawn with replacement are kept as drawn.
class MaskDataset {
 public:
  MaskDataset() = default;
  explicit MaskDataset(std::size_t n) : n_(n) {}
  MaskDataset(std::size_t n, std::vector<Sample> samples);

  std::size_t n() const noexcept { return n_; }
  std::size_t size() const noexcept { return samples_.size(); }
  bool empty() const noexcept { return samples_.empty(); }
  const Sample& operator[](std::size_t i) const { return samples_[i]; }
  std::span<const Sample> samples() const noexcept { return samples_; }

  void push_back(Sample s);

  std::vector<double> values() const;
  std::vector<Mask> masks() const;
  /// Rows selected by index, in the given order.
  MaskDataset subset(std::span<const std::size_t> rows) const;

 private:
  std::size_t n_ = 0;
  std::vector<Sample> samples_;
};

/// A real-valued set function queried in batches.
///
/// Implementations must be deterministic within a session and return exactly
/// one value per mask, in order. Table and spectrum-backed kinds may be
/// queried concurrently; the external kind serializes internally.
class ValueFunction {
 public:
  virtual ~ValueFunction() = default;
  virtual std::size_t n() const = 0;
  virtual std::vector<double> query(std::span<const Mask> masks) const = 0;

  double operator()(const Mask& mask) const { return query(std::span<const Mask>(&mask, 1)).front(); }

 protected:
  void check_widths(std::span<const Mask> masks) const;
};

/// Complete or partial lookup table. Querying a subset missing from a partial
/// table is a provider error.
class TableValueFunction final : public ValueFunction {
 public:
  TableValueFunction(std::size_t n, std::unordered_map<Mask, double, MaskHash> table);
  /// Dense table indexed by the integer whose bit i is feature i (n <= 30).
  static TableValueFunction from_dense(std::size_t n, std::span<const double> values);

  std::size_t n() const override { return n_; }
  std::vector<double> query(std::span<const Mask> masks) const override;
  std::size_t entries() const noexcept { return table_.size(); }
  const std::unordered_map<Mask, double, MaskHash>& table() const noexcept { return table_; }

 private:
  std::size_t n_;
  std::unordered_map<Mask, double, MaskHash> table_;
};

/// Adapts a per-mask callable. Useful for closed-form functions in tests and
/// for the Python bindings.
class CallbackValueFunction final : public ValueFunction {
 public:
  using Fn = std::function<double(const Mask&)>;
  CallbackValueFunction(std::size_t n, Fn fn) : n_(n), fn_(std::move(fn)) {}

  std::size_t n() const override { return n_; }
  std::vector<double> query(std::span<const Mask> masks) const override;

 private:
  std::size_t n_;
  Fn fn_;
};

/// Subprocess provider. The command is spawned once; each batch is written as
/// one bitstring per line followed by a blank line, and the child answers one
/// decimal value per line. SPEX_VF_N carries n into the child's environment.
class ExternalValueFunction final : public ValueFunction {
 public:
  ExternalValueFunction(std::size_t n, std::vector<std::string> argv);
  ~ExternalValueFunction() override;
  ExternalValueFunction(const ExternalValueFunction&) = delete;
  ExternalValueFunction& operator=(const ExternalValueFunction&) = delete;

  std::size_t n() const override { return n_; }
  std::vector<double> query(std::span<const Mask> masks) const override;

 private:
  void spawn();
  void shutdown() noexcept;

  std::size_t n_;
  std::vector<std::string> argv_;
  mutable std::mutex mu_;
  int pid_ = -1;
  int to_child_ = -1;
  int from_child_ = -1;
  mutable std::string pending_;  // bytes read past the last complete reply
};

/// Uniform masks over the power set: every bit is an independent fair coin.
/// Pure function of (n, count, seed).
std::vector<Mask> sample_masks(std::size_t n, std::size_t count, std::uint64_t seed);

/// Queries `vf` on `masks` in batches of `batch_size`. A provider failure is
/// rethrown as ProviderError carrying the failing batch index.
MaskDataset evaluate_dataset(const ValueFunction& vf, std::span<const Mask> masks,
                             std::size_t batch_size = 256);

/// Builds a provider from a JSON description:
///   {"kind":"table","n":N,"entries":[{"mask":[...],"value":v},...]}
///   {"kind":"synthetic","family":"peak|complete_hierarchy|staircase","n":N,"seed":s,
///    "num_sets":10,"cardinality":5}
///   {"kind":"external","n":N,"cmd":"path","args":[...],"batch":64}
std::shared_ptr<const ValueFunction> make_value_function(const nlohmann::json& spec);

/// Batch size hint stored in a provider description ("batch"), default 256.
std::size_t provider_batch_size(const nlohmann::json& spec);

}  // namespace spex
