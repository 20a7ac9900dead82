#include "tn4ml/serialization.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include "tn4ml/error.hpp"

namespace tn4ml {
namespace {

static_assert(std::endian::native == std::endian::little || std::endian::native == std::endian::big);

std::string role_of(const std::string& label, std::size_t k) {
  if (label == upper_label(k)) return "upper";
  if (label == lower_label(k)) return "lower";
  if (k > 0 && label == bond_label(k - 1)) return "left_bond";
  return "right_bond";
}

std::uint64_t to_little(std::uint64_t bits) {
  if constexpr (std::endian::native == std::endian::big) {
    std::uint64_t out = 0;
    for (int b = 0; b < 8; ++b) out |= ((bits >> (8 * b)) & 0xFFu) << (8 * (7 - b));
    return out;
  }
  return bits;
}

}  // namespace

nlohmann::json model_manifest(const TensorTrain& tt) {
  nlohmann::json sites = nlohmann::json::array();
  for (std::size_t k = 0; k < tt.size(); ++k) {
    nlohmann::json legs = nlohmann::json::array();
    for (const auto& idx : tt.site(k).indices()) {
      legs.push_back({{"label", idx.label}, {"dim", idx.dim}, {"role", role_of(idx.label, k)}});
    }
    sites.push_back({{"indices", legs}});
  }
  nlohmann::json center = nullptr;
  if (tt.canonical_center()) center = *tt.canonical_center();
  return {{"format_version", kModelFormatVersion},
          {"kind", std::string(to_string(tt.kind()))},
          {"n_sites", tt.size()},
          {"canonical_center", center},
          {"sites", sites}};
}

void save_model(const TensorTrain& tt, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  {
    std::ofstream manifest(dir / "manifest.json");
    if (!manifest) throw Error("cannot write " + (dir / "manifest.json").string());
    manifest << model_manifest(tt).dump(2) << "\n";
  }
  std::ofstream weights(dir / "weights.bin", std::ios::binary);
  if (!weights) throw Error("cannot write " + (dir / "weights.bin").string());
  for (const auto& site : tt.sites()) {
    for (double x : site.data()) {
      const std::uint64_t bits = to_little(std::bit_cast<std::uint64_t>(x));
      weights.write(reinterpret_cast<const char*>(&bits), sizeof bits);
    }
  }
  if (!weights) throw Error("failed writing " + (dir / "weights.bin").string());
}

namespace {

TensorTrain load_from(const nlohmann::json& manifest, const std::filesystem::path& dir);

}  // namespace

TensorTrain load_model(const std::filesystem::path& dir) {
  std::ifstream manifest_in(dir / "manifest.json");
  if (!manifest_in) throw Error("cannot read " + (dir / "manifest.json").string());
  nlohmann::json manifest;
  try {
    manifest = nlohmann::json::parse(manifest_in);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("malformed manifest.json: " + std::string(e.what()));
  }
  try {
    return load_from(manifest, dir);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("malformed manifest.json: " + std::string(e.what()));
  }
}

namespace {

TensorTrain load_from(const nlohmann::json& manifest, const std::filesystem::path& dir) {
  if (!manifest.is_object() || manifest.value("format_version", 0) != kModelFormatVersion) {
    throw ParseError("unsupported model format_version");
  }
  const auto kind = network_kind_from_string(manifest.at("kind").get<std::string>());
  const auto n_sites = manifest.at("n_sites").get<std::size_t>();
  const auto& site_specs = manifest.at("sites");
  if (site_specs.size() != n_sites) throw ParseError("manifest site count mismatch");

  std::ifstream weights(dir / "weights.bin", std::ios::binary);
  if (!weights) throw Error("cannot read " + (dir / "weights.bin").string());
  std::vector<Tensor> sites;
  for (const auto& spec : site_specs) {
    std::vector<Index> indices;
    std::size_t count = 1;
    for (const auto& leg : spec.at("indices")) {
      indices.push_back({leg.at("label").get<std::string>(), leg.at("dim").get<std::size_t>()});
      count *= indices.back().dim;
    }
    std::vector<double> data(count);
    for (auto& x : data) {
      std::uint64_t bits = 0;
      if (!weights.read(reinterpret_cast<char*>(&bits), sizeof bits)) {
        throw ParseError("weights.bin is truncated");
      }
      x = std::bit_cast<double>(to_little(bits));
    }
    sites.emplace_back(std::move(indices), std::move(data));
  }
  if (weights.peek() != std::char_traits<char>::eof()) {
    throw ParseError("weights.bin has trailing bytes");
  }
  std::optional<std::size_t> center;
  if (manifest.contains("canonical_center") && !manifest["canonical_center"].is_null()) {
    center = manifest["canonical_center"].get<std::size_t>();
  }
  return TensorTrain(kind, std::move(sites), center);
}

}  // namespace

}  // namespace tn4ml
