#include "analogwave/rule_io.hpp"

#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "analogwave/format.hpp"
#include "analogwave/ingest.hpp"
#include "json.hpp"

namespace analogwave {

namespace {

std::string quoted(const std::string& s) {
  return '"' + s + '"';
}

}  // namespace

// Built by hand so that key order and float text are fixed byte for byte.
std::string rule_to_json_line(const Rule& r) {
  std::string out = "{\"target\":" + std::to_string(r.target) +
                    ",\"direction\":" + quoted(to_string(r.direction)) +
                    ",\"i1\":" + std::to_string(r.i1) + ",\"i2\":" + std::to_string(r.i2) +
                    ",\"n\":" + std::to_string(r.n) + ",\"l\":" + std::to_string(r.l) +
                    ",\"min\":" + format_double(r.min_thr) + ",\"max\":" + format_double(r.max_thr) +
                    ",\"firings\":[";
  for (std::size_t k = 0; k < r.firings.size(); ++k) {
    if (k) out += ',';
    out += "{\"date\":" + quoted(to_iso(r.firings[k].day)) +
           ",\"side\":" + quoted(to_string(r.firings[k].side)) + "}";
  }
  out += "],\"quorum\":[";
  for (std::size_t k = 0; k < r.quorum.size(); ++k) {
    if (k) out += ',';
    out += quoted(to_iso(r.quorum[k]));
  }
  out += "],\"seasonal_window\":";
  if (r.seasonal_window) {
    out += "{\"start_month\":" + std::to_string(r.seasonal_window->start_month) +
           ",\"length_months\":" + std::to_string(r.seasonal_window->length_months) + "}";
  } else {
    out += "null";
  }
  out += '}';
  return out;
}

Rule rule_from_json_line(const std::string& line) {
  const auto j = nlohmann::json::parse(line);
  Rule r;
  r.target = j.at("target").get<int>();
  r.direction = parse_direction(j.at("direction").get<std::string>());
  r.i1 = j.at("i1").get<int>();
  r.i2 = j.at("i2").get<int>();
  r.n = j.at("n").get<int>();
  r.l = j.at("l").get<int>();
  r.min_thr = j.at("min").get<double>();
  r.max_thr = j.at("max").get<double>();
  for (const auto& f : j.at("firings")) {
    r.firings.push_back({date_to_index(parse_iso_date(f.at("date").get<std::string>())),
                         parse_side(f.at("side").get<std::string>())});
  }
  for (const auto& d : j.at("quorum")) {
    r.quorum.push_back(date_to_index(parse_iso_date(d.get<std::string>())));
  }
  const auto& w = j.at("seasonal_window");
  if (!w.is_null()) {
    r.seasonal_window = SeasonalWindow{w.at("start_month").get<int>(), w.at("length_months").get<int>()};
  }
  return r;
}

void write_rules(std::ostream& out, const std::vector<Rule>& rules) {
  for (const auto& r : rules) out << rule_to_json_line(r) << '\n';
}

std::vector<Rule> read_rules(std::istream& in, const std::string& source) {
  std::vector<Rule> rules;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    try {
      rules.push_back(rule_from_json_line(line));
    } catch (const std::exception& e) {
      throw InputError(source, line_no, std::string("bad rule: ") + e.what());
    }
  }
  return rules;
}

std::string rules_to_string(const std::vector<Rule>& rules) {
  std::ostringstream out;
  write_rules(out, rules);
  return out.str();
}

std::vector<Rule> read_rules_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError(path, 0, "cannot open file");
  return read_rules(in, path);
}

}  // namespace analogwave
