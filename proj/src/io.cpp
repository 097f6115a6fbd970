#include "ebshrink/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <set>

namespace ebshrink {

ParseError::ParseError(std::size_t line, const std::string& what)
    : InvalidInput("line " + std::to_string(line) + ": " + what), line_(line) {}

const char* to_string(RowSchema s) { return s == RowSchema::Counts ? "counts" : "summary"; }

namespace {

std::vector<std::string> split_csv(std::string_view line, std::size_t line_no) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (quoted) throw ParseError(line_no, "unterminated quoted field");
  out.push_back(std::move(cur));
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

double parse_real(std::string_view s, std::size_t line, std::string_view column) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || end != s.data() + s.size() || !std::isfinite(v)) {
    throw ParseError(line, "column " + std::string(column) + ": '" + std::string(s) + "' is not a finite number");
  }
  return v;
}

std::uint64_t parse_count(std::string_view s, std::size_t line, std::string_view column) {
  s = trim(s);
  std::uint64_t v = 0;
  const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || end != s.data() + s.size()) {
    throw ParseError(line, "column " + std::string(column) + ": '" + std::string(s) +
                               "' is not a non-negative integer");
  }
  return v;
}

}  // namespace

std::vector<Experiment> read_experiments(std::istream& in, std::string_view default_id) {
  std::string raw;
  std::size_t line_no = 0;
  std::map<std::string, std::size_t, std::less<>> col;
  std::size_t width = 0;
  bool have_header = false;
  std::optional<RowSchema> schema;
  std::vector<Experiment> out;
  std::map<std::string, std::size_t, std::less<>> exp_index;
  std::map<std::string, std::set<std::string>, std::less<>> seen;

  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line = raw;
    if (line_no == 1 && line.substr(0, 3) == "\xEF\xBB\xBF") line.remove_prefix(3);
    if (trim(line).empty() || trim(line).front() == '#') continue;
    auto fields = split_csv(line, line_no);
    if (!have_header) {
      for (std::size_t i = 0; i < fields.size(); ++i) {
        const std::string name(trim(fields[i]));
        if (!col.emplace(name, i).second) throw ParseError(line_no, "duplicate column '" + name + "'");
      }
      for (const char* req : {"arm_id", "n"}) {
        if (!col.count(req)) throw ParseError(line_no, std::string("header lacks column '") + req + "'");
      }
      const bool counts = col.count("successes") > 0;
      const bool summary = col.count("mean") > 0 && col.count("std_err") > 0;
      if (!counts && !summary) {
        throw ParseError(line_no, "header needs 'successes' or both 'mean' and 'std_err'");
      }
      width = fields.size();
      have_header = true;
      continue;
    }
    if (fields.size() != width) {
      throw ParseError(line_no, "expected " + std::to_string(width) + " fields, found " +
                                    std::to_string(fields.size()));
    }
    auto cell = [&](std::string_view name) -> std::optional<std::string_view> {
      const auto it = col.find(name);
      if (it == col.end()) return std::nullopt;
      const auto v = trim(fields[it->second]);
      if (v.empty()) return std::nullopt;
      return v;
    };
    const auto succ = cell("successes");
    const auto mean = cell("mean");
    const auto se = cell("std_err");
    RowSchema row;
    if (succ && !mean && !se) {
      row = RowSchema::Counts;
    } else if (!succ && mean && se) {
      row = RowSchema::Summary;
    } else {
      throw ParseError(line_no, "row must fill either successes or both mean and std_err");
    }
    if (!schema) {
      schema = row;
    } else if (*schema != row) {
      throw ParseError(line_no, std::string("row uses the ") + to_string(row) + " schema but the file uses the " +
                                    to_string(*schema) + " schema");
    }
    const auto arm = cell("arm_id");
    if (!arm) throw ParseError(line_no, "empty arm_id");
    const auto n_cell = cell("n");
    if (!n_cell) throw ParseError(line_no, "empty n");
    const std::uint64_t n = parse_count(*n_cell, line_no, "n");
    if (n == 0) throw ParseError(line_no, "n must be positive");

    ArmSummary a;
    try {
      if (row == RowSchema::Counts) {
        const std::uint64_t s = parse_count(*succ, line_no, "successes");
        if (s > n) throw ParseError(line_no, "successes exceed n");
        a = ArmSummary::from_counts(std::string(*arm), n, s);
      } else {
        a.arm_id = std::string(*arm);
        a.n = n;
        a.mean = parse_real(*mean, line_no, "mean");
        a.std_err = parse_real(*se, line_no, "std_err");
      }
      validate(a);
    } catch (const ParseError&) {
      throw;
    } catch (const InvalidInput& e) {
      throw ParseError(line_no, e.what());
    }

    const std::string exp_id(cell("experiment_id").value_or(default_id));
    auto [it, fresh] = exp_index.emplace(exp_id, out.size());
    if (fresh) out.push_back({exp_id, row, {}});
    if (!seen[exp_id].insert(a.arm_id).second) {
      throw ParseError(line_no, "duplicate arm_id '" + a.arm_id + "' in experiment '" + exp_id + "'");
    }
    out[it->second].arms.push_back(std::move(a));
  }
  if (!have_header) throw ParseError(line_no, "missing header row");
  if (out.empty()) throw ParseError(line_no, "no data rows");
  return out;
}

std::vector<Experiment> read_experiments_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInput("cannot open '" + path.string() + "'");
  const std::string stem = path.stem().string();
  return read_experiments(in, stem.empty() ? "experiment" : stem);
}

std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

void write_summaries(std::ostream& out, const std::vector<ArmSummary>& arms) {
  out << "arm_id,n,mean,std_err\n";
  for (const auto& a : arms) {
    out << csv_field(a.arm_id) << ',' << a.n << ',' << format_number(a.mean) << ','
        << format_number(a.std_err) << '\n';
  }
}

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (v == 0.0) return "0";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 12);
  return std::string(buf, res.ptr);
}

double quantize(double v) {
  if (!std::isfinite(v)) return v;
  const std::string s = format_number(v);
  double out = 0.0;
  std::from_chars(s.data(), s.data() + s.size(), out);
  return out;
}

}  // namespace ebshrink
