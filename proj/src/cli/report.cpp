#include "report.hpp"

#include <openssl/evp.h>

#include <array>
#include <cmath>
#include <fstream>
#include <memory>

#include "ebshrink/error.hpp"
#include "ebshrink/io.hpp"

namespace ebshrink::cli {

Json number(double v) {
  if (!std::isfinite(v)) return nullptr;
  return quantize(v);
}

Json number(const std::optional<double>& v) { return v ? number(*v) : Json(nullptr); }

std::string sha256_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInput("cannot open '" + path.string() + "'");
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("SHA-256 unavailable");
  }
  std::array<char, 1 << 16> buf;
  while (in) {
    in.read(buf.data(), buf.size());
    if (in.gcount() > 0) EVP_DigestUpdate(ctx.get(), buf.data(), static_cast<std::size_t>(in.gcount()));
  }
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx.get(), md, &len);
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  for (unsigned i = 0; i < len; ++i) {
    out += kHex[md[i] >> 4];
    out += kHex[md[i] & 15];
  }
  return out;
}

std::string render_json(const Json& j) { return j.dump(2) + "\n"; }

CsvTable::CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

CsvTable& CsvTable::row() {
  rows_.emplace_back();
  return *this;
}

CsvTable& CsvTable::add(const std::string& text) {
  rows_.back().push_back(csv_field(text));
  return *this;
}

CsvTable& CsvTable::add(double v) {
  rows_.back().push_back(std::isfinite(v) ? format_number(v) : "");
  return *this;
}

CsvTable& CsvTable::add(const std::optional<double>& v) {
  rows_.back().push_back(v && std::isfinite(*v) ? format_number(*v) : "");
  return *this;
}

CsvTable& CsvTable::add_count(unsigned long long v) {
  rows_.back().push_back(std::to_string(v));
  return *this;
}

std::string CsvTable::render(const Json& manifest) const {
  std::string out = "# manifest " + manifest.dump() + "\n";
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out += ',';
      out += cells[i];
    }
    out += '\n';
  };
  line(header_);
  for (const auto& r : rows_) line(r);
  return out;
}

}  // namespace ebshrink::cli
