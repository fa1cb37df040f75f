#pragma once

#include <json.hpp>
#include <string>

#include "smeq/similarity.hpp"
#include "smeq/stable_laws.hpp"
#include "smeq/weight_model.hpp"

namespace smeq {

using Json = nlohmann::json;

// group: {"kind":"continuous","Q":[[...]],"compact_generators":[[[...]]],
//         "isotropic":bool} or {"kind":"discrete","A":{...}} or
// {"kind":"trivial","dim":d}
Json to_json(const GroupDescriptor& g);
GroupDescriptor group_from_json(const Json& j);

// similarity: {"scale": s, "rotation": [[...]]}
Json to_json(const Similarity& a);
Similarity similarity_from_json(const Json& j);

// spectral measure: {"atoms":[{"s":[...],"w":...}]}
Json to_json(const SpectralMeasure& rho);
SpectralMeasure spectral_from_json(const Json& j);

// stable spec: {"alpha":a,"group":{...},"payload":{"kind":...}}
Json to_json(const StableSpec& spec);
StableSpec stable_spec_from_json(const Json& j);

/// Model configs: {"preset":"cyclic_polya","b":7}, {"preset":"table",
/// "atoms":[{"prob":p,"C":[...],"T":[{...}]}],"group":{...}}, etc.
WeightModel model_from_json(const Json& j);

/// Accepts JSON directly, or a flat TOML subset (tables, key = value with
/// strings, numbers, booleans and arrays) normalized into the same JSON form.
Json load_config_text(const std::string& text);
Json load_config_file(const std::string& path);

/// RFC-4180 CSV with '.' decimals and 17 significant digits for doubles.
class CsvWriter {
 public:
  explicit CsvWriter(std::vector<std::string> header);
  void row(const std::vector<std::string>& cells);
  void row_values(const std::vector<double>& values);
  const std::string& str() const { return buf_; }
  static std::string format(double v);
  static std::string quote(const std::string& s);

 private:
  std::string buf_;
  std::size_t columns_;
};

/// FNV-1a digest of a byte string; stable across platforms, used to pin
/// outputs in run manifests.
uint64_t fnv1a(const std::string& bytes);

}  // namespace smeq
