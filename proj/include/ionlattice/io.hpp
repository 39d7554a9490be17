#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "ionlattice/config.hpp"
#include "ionlattice/geometry.hpp"
#include "ionlattice/trap.hpp"

namespace ionlattice {

using Json = nlohmann::json;

using CsvValue = std::variant<double, long long, std::string>;

struct CsvTable {
  std::vector<std::string> columns;
  std::vector<std::vector<CsvValue>> rows;

  void add_row(std::vector<CsvValue> row);  // throws if the width differs
};

// Who produced an output and from which configuration.
struct Provenance {
  std::string command;
  RunConfig config;
};

// Doubles as %.9g. Layout:
//   # command: <name>
//   # config <key> = <value>      (one per key)
//   <header>
//   <rows>
//   # content_hash fnv1a64:<hex>  (over every preceding byte)
std::string format_csv(const CsvTable& table, const Provenance& prov);

struct CsvDocument {
  std::string command;
  std::map<std::string, std::string> config;
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;
  std::string content_hash;
  bool hash_ok = false;

  std::size_t column(const std::string& name) const;  // throws std::out_of_range
  double number(std::size_t row, const std::string& name) const;
};

CsvDocument parse_csv(const std::string& text);
CsvDocument load_csv(const std::filesystem::path& path);

Json config_to_json(const RunConfig& config);

// {command, config, result, content_hash}; the hash covers the compact dump of
// the document without the hash field.
Json make_document(const Provenance& prov, Json result);
std::string format_json(const Json& document);

// {contours: [{orientation, vertices_um}], rf_amplitude_V}
Json layout_to_json(const ElectrodeLayout& layout);

// site_i, site_j, x_um, y_um, r_um, w1_MHz, w2_MHz, w3_MHz, depth_eV, eta_geo, zeta, q
CsvTable site_table(const std::vector<TrapSite>& sites);

// Collects the files of one command run and writes manifest.json on finish().
class OutputSet {
 public:
  OutputSet(std::filesystem::path dir, Provenance prov);

  void write_csv(const std::string& name, const CsvTable& table);
  void write_json(const std::string& name, Json result);
  // Writes manifest.json listing every file with its content hash.
  void finish(Json summary = Json::object());

  const std::filesystem::path& dir() const { return dir_; }
  const Provenance& provenance() const { return prov_; }
  const std::vector<std::pair<std::string, std::string>>& files() const { return files_; }

 private:
  std::filesystem::path dir_;
  Provenance prov_;
  std::vector<std::pair<std::string, std::string>> files_;  // name, hash
};

void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace ionlattice
