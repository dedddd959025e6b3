#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "spex/gbt.hpp"
#include "spex/identify.hpp"
#include "spex/indices.hpp"
#include "spex/metrics.hpp"
#include "spex/setfn.hpp"
#include "spex/spectrum.hpp"

// File formats. Masks are written as sorted index lists, which is the
// canonical on-disk form; bitstrings appear only on the external-provider pipe.
namespace spex::io {

using nlohmann::json;

json mask_to_json(const Mask& m);
Mask mask_from_json(const json& j, std::size_t n);

/// JSON Lines: {"n":N} header, then {"mask":[...],"value":v} per sample.
void write_dataset(std::ostream& os, const MaskDataset& data);
MaskDataset read_dataset(std::istream& is);

/// Same layout without values (output of `sample`).
void write_masks(std::ostream& os, std::size_t n, std::span<const Mask> masks);
/// Reads masks from either a mask file or a dataset file (values ignored).
std::vector<Mask> read_masks(std::istream& is, std::size_t* n_out);

/// JSON Lines: {"n":N,"basis":"fourier"|"mobius"} header, then
/// {"set":[...],"coef":v} sorted by |coef| descending.
template <Basis B>
void write_spectrum(std::ostream& os, const Spectrum<B>& spec);
FourierSpectrum read_fourier(std::istream& is);
MobiusSpectrum read_mobius(std::istream& is);

/// {"n","base_score","learning_rate","trees":[{"feat","left","right"}|{"value"}]}.
json model_to_json(const GbtModel& model);
GbtModel model_from_json(const json& j);

json index_report_to_json(const IndexReport& report);
json solution_to_json(const IdentSolution& sol);
json metric_to_json(const MetricValue& v);

/// Reads a whole file, throwing InvalidArgument when it cannot be opened.
std::string read_file(const std::string& path);
json read_json_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

}  // namespace spex::io
