#include "ionlattice/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace ionlattice {

namespace {

constexpr std::string_view kHashPrefix = "# content_hash fnv1a64:";

std::string format_cell(const CsvValue& v) {
  if (const auto* d = std::get_if<double>(&v)) {
    if (std::isnan(*d)) return "nan";
    if (std::isinf(*d)) return *d > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.9g", *d);
    return buf;
  }
  if (const auto* i = std::get_if<long long>(&v)) return std::to_string(*i);
  const auto& s = std::get<std::string>(v);
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t k = 0; k < line.size(); ++k) {
    const char c = line[k];
    if (quoted) {
      if (c == '"' && k + 1 < line.size() && line[k + 1] == '"') {
        cur += '"';
        ++k;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

}  // namespace

void CsvTable::add_row(std::vector<CsvValue> row) {
  if (row.size() != columns.size()) throw std::invalid_argument("CSV row width does not match the header");
  rows.push_back(std::move(row));
}

std::string format_csv(const CsvTable& table, const Provenance& prov) {
  std::string out = "# command: " + prov.command + "\n";
  for (const auto& [k, v] : prov.config.entries()) out += "# config " + k + " = " + v + "\n";
  for (std::size_t c = 0; c < table.columns.size(); ++c) out += (c ? "," : "") + table.columns[c];
  out += "\n";
  for (const auto& row : table.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) out += (c ? "," : "") + format_cell(row[c]);
    out += "\n";
  }
  out += std::string(kHashPrefix) + hex64(fnv1a64(out)) + "\n";
  return out;
}

std::size_t CsvDocument::column(const std::string& name) const {
  for (std::size_t c = 0; c < columns.size(); ++c)
    if (columns[c] == name) return c;
  throw std::out_of_range("no CSV column " + name);
}

double CsvDocument::number(std::size_t row, const std::string& name) const {
  return std::stod(rows.at(row).at(column(name)));
}

CsvDocument parse_csv(const std::string& text) {
  CsvDocument doc;
  std::istringstream in(text);
  std::string line;
  std::size_t consumed = 0;
  bool header = false;
  while (std::getline(in, line)) {
    const std::size_t line_start = consumed;
    consumed += line.size() + 1;
    if (line.rfind(kHashPrefix, 0) == 0) {
      doc.content_hash = line.substr(kHashPrefix.size());
      doc.hash_ok = doc.content_hash == hex64(fnv1a64(std::string_view(text).substr(0, line_start)));
      continue;
    }
    if (line.rfind("# command: ", 0) == 0) {
      doc.command = line.substr(11);
      continue;
    }
    if (line.rfind("# config ", 0) == 0) {
      const auto eq = line.find(" = ");
      if (eq != std::string::npos) doc.config[line.substr(9, eq - 9)] = line.substr(eq + 3);
      continue;
    }
    if (line.empty() || line[0] == '#') continue;
    if (!header) {
      doc.columns = split_csv_line(line);
      header = true;
    } else {
      doc.rows.push_back(split_csv_line(line));
    }
  }
  return doc;
}

CsvDocument load_csv(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path.string());
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_csv(ss.str());
}

Json config_to_json(const RunConfig& config) {
  Json j = Json::object();
  for (const auto& [k, v] : config.entries()) j[k] = Json::parse(v);
  return j;
}

Json make_document(const Provenance& prov, Json result) {
  Json doc = Json::object();
  doc["command"] = prov.command;
  doc["config"] = config_to_json(prov.config);
  doc["result"] = std::move(result);
  const std::string hash = hex64(fnv1a64(doc.dump()));
  doc["content_hash"] = "fnv1a64:" + hash;
  return doc;
}

std::string format_json(const Json& document) { return document.dump(2) + "\n"; }

Json layout_to_json(const ElectrodeLayout& layout) {
  Json contours = Json::array();
  for (const auto& c : layout.contours) {
    Json verts = Json::array();
    for (const auto& v : c.vertices) verts.push_back({v.x() * 1e6, v.y() * 1e6});
    contours.push_back({{"orientation", c.signed_area() >= 0.0 ? "ccw" : "cw"},
                        {"kind", c.kind == ContourKind::kOuter ? "outer" : "hole"},
                        {"vertices_um", std::move(verts)}});
  }
  return {{"contours", std::move(contours)}, {"rf_amplitude_V", layout.rf_amplitude}};
}

CsvTable site_table(const std::vector<TrapSite>& sites) {
  CsvTable t;
  t.columns = {"site_i", "site_j", "x_um", "y_um", "r_um", "w1_MHz", "w2_MHz", "w3_MHz",
               "depth_eV", "eta_geo", "zeta", "q", "status"};
  const double to_mhz = 1.0 / (2.0 * constants::kPi * 1e6);
  for (const auto& s : sites) {
    t.add_row({static_cast<long long>(s.index.i), static_cast<long long>(s.index.j), s.index.position.x() * 1e6,
               s.index.position.y() * 1e6, s.ion_height * 1e6, s.modes.omega[0] * to_mhz,
               s.modes.omega[1] * to_mhz, s.modes.omega[2] * to_mhz, s.depth_ev, s.eta_geo, s.zeta, s.q,
               std::string(to_string(s.status))});
  }
  return t;
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  f << text;
  if (!f) throw std::runtime_error("write failed for " + path.string());
}

OutputSet::OutputSet(std::filesystem::path dir, Provenance prov) : dir_(std::move(dir)), prov_(std::move(prov)) {
  std::filesystem::create_directories(dir_);
}

void OutputSet::write_csv(const std::string& name, const CsvTable& table) {
  const std::string text = format_csv(table, prov_);
  write_text_file(dir_ / name, text);
  const auto pos = text.rfind(kHashPrefix);
  files_.emplace_back(name, text.substr(pos + kHashPrefix.size(), 16));
}

void OutputSet::write_json(const std::string& name, Json result) {
  const Json doc = make_document(prov_, std::move(result));
  write_text_file(dir_ / name, format_json(doc));
  files_.emplace_back(name, doc["content_hash"].get<std::string>().substr(8));
}

void OutputSet::finish(Json summary) {
  Json files = Json::array();
  for (const auto& [name, hash] : files_) files.push_back({{"file", name}, {"content_hash", "fnv1a64:" + hash}});
  summary["files"] = std::move(files);
  const Json doc = make_document(prov_, std::move(summary));
  write_text_file(dir_ / "manifest.json", format_json(doc));
}

}  // namespace ionlattice
