#include <fstream>
#include <set>
#include <sstream>

#include "illum/dataset.hpp"
#include "illum/error.hpp"
#include "illum/png_io.hpp"
#include "illum/spec_json.hpp"

namespace illum {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr std::pair<AugmentStep::Kind, const char*> kAugmentKinds[] = {
    {AugmentStep::Kind::hflip, "hflip"},
    {AugmentStep::Kind::vflip, "vflip"},
    {AugmentStep::Kind::center_crop, "center_crop"},
    {AugmentStep::Kind::random_resized_crop, "random_resized_crop"},
};

const char* kind_name(AugmentStep::Kind kind) {
  for (const auto& [k, name] : kAugmentKinds)
    if (k == kind) return name;
  return "?";
}

AugmentStep::Kind kind_from(const std::string& name) {
  for (const auto& [k, n] : kAugmentKinds)
    if (name == n) return k;
  throw Error(ErrorKind::configuration, "unknown augmentation kind '" + name + "'");
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

std::string_view to_string(Label label) {
  return label == Label::illusion ? "illusion" : "non_illusion";
}

std::string_view to_string(Provenance provenance) {
  return provenance == Provenance::rendered ? "rendered" : "augmented";
}

json to_json(const ManifestEntry& e) {
  json j;
  j["schema_version"] = kManifestSchemaVersion;
  j["id"] = e.id;
  j["family"] = std::string(to_string(e.family));
  j["label"] = std::string(to_string(e.label));
  j["provenance"] = std::string(to_string(e.provenance));
  j["image"] = e.image_path;
  j["mask"] = e.mask_path;
  j["spec"] = to_json(e.spec);
  j["parent_id"] = e.parent_id ? json(*e.parent_id) : json(nullptr);
  if (e.augmentation) {
    const auto& a = *e.augmentation;
    j["augmentation"] = {{"kind", kind_name(a.kind)},
                         {"crop", {a.crop.x, a.crop.y, a.crop.width, a.crop.height}}};
  } else {
    j["augmentation"] = nullptr;
  }
  return j;
}

ManifestEntry manifest_entry_from_json(const json& j) {
  try {
    const int version = j.at("schema_version").get<int>();
    if (version != kManifestSchemaVersion)
      throw Error(ErrorKind::configuration,
                  "manifest schema_version " + std::to_string(version) + " is not supported");
    ManifestEntry e;
    e.id = j.at("id").get<std::string>();
    e.family = family_from_string(j.at("family").get<std::string>());
    const auto label = j.at("label").get<std::string>();
    if (label != "illusion" && label != "non_illusion")
      throw Error(ErrorKind::configuration, "unknown label '" + label + "'");
    e.label = label == "illusion" ? Label::illusion : Label::non_illusion;
    const auto prov = j.at("provenance").get<std::string>();
    if (prov != "rendered" && prov != "augmented")
      throw Error(ErrorKind::configuration, "unknown provenance '" + prov + "'");
    e.provenance = prov == "rendered" ? Provenance::rendered : Provenance::augmented;
    e.image_path = j.at("image").get<std::string>();
    e.mask_path = j.at("mask").get<std::string>();
    e.spec = stimulus_from_json(j.at("spec"));
    if (j.contains("parent_id") && !j["parent_id"].is_null())
      e.parent_id = j["parent_id"].get<std::string>();
    if (j.contains("augmentation") && !j["augmentation"].is_null()) {
      const auto& a = j["augmentation"];
      AugmentStep step;
      step.kind = kind_from(a.at("kind").get<std::string>());
      const auto crop = a.at("crop").get<std::vector<int>>();
      if (crop.size() != 4) throw Error(ErrorKind::configuration, "crop must have 4 integers");
      step.crop = {crop[0], crop[1], crop[2], crop[3]};
      e.augmentation = step;
    }
    if (e.provenance == Provenance::augmented && (!e.parent_id || !e.augmentation))
      throw Error(ErrorKind::configuration, "augmented entry " + e.id + " lacks its parent record");
    return e;
  } catch (const json::exception& ex) {
    throw Error(ErrorKind::configuration, std::string("malformed manifest line: ") + ex.what());
  }
}

std::size_t Manifest::count(Label label) const {
  std::size_t n = 0;
  for (const auto& e : entries) n += e.label == label;
  return n;
}

const ManifestEntry* Manifest::find(const std::string& id) const {
  for (const auto& e : entries)
    if (e.id == id) return &e;
  return nullptr;
}

Manifest load_manifest(const fs::path& path) {
  Manifest m;
  const fs::path file = fs::is_directory(path) ? path / "manifest.jsonl" : path;
  m.root = file.parent_path();
  std::ifstream in(file);
  if (!in) throw Error(ErrorKind::io, "cannot read manifest " + file.string());
  std::set<std::string> ids;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& ex) {
      throw Error(ErrorKind::configuration,
                  file.string() + ":" + std::to_string(lineno) + ": " + ex.what());
    }
    auto entry = manifest_entry_from_json(j);
    if (!ids.insert(entry.id).second)
      throw Error(ErrorKind::configuration, "duplicate manifest id " + entry.id);
    m.entries.push_back(std::move(entry));
  }
  return m;
}

void save_manifest(const Manifest& manifest) {
  std::ostringstream out;
  for (const auto& e : manifest.entries) out << to_json(e).dump() << '\n';
  write_file_atomic(manifest.file(), out.str());
}

void export_manifest_csv(const Manifest& manifest, const fs::path& path) {
  std::ostringstream out;
  out << "id,family,label,provenance,image,mask,parent_id\n";
  for (const auto& e : manifest.entries) {
    out << e.id << ',' << to_string(e.family) << ',' << to_string(e.label) << ','
        << to_string(e.provenance) << ',' << csv_field(e.image_path) << ','
        << csv_field(e.mask_path) << ',' << e.parent_id.value_or("") << '\n';
  }
  write_file_atomic(path, out.str());
}

}  // namespace illum
