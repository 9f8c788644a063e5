#include "trsq/signature_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace trsq {

namespace {

using OrderedJson = nlohmann::ordered_json;

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void check_shape(std::uint32_t n, std::uint32_t ell) {
  if (n == 0 || ell == 0 || ell > 26 || ell > n)
    throw std::runtime_error("signature artifact: bad n/ell");
}

}  // namespace

std::string signature_to_json(const SubwordSignature& sig) {
  check_shape(sig.n, sig.ell);
  OrderedJson root;
  root["n"] = sig.n;
  root["ell"] = sig.ell;
  root["delta"] = sig.delta;
  OrderedJson entries = OrderedJson::array();
  const std::size_t P = sig.patterns();
  for (std::size_t i = 0; i < sig.n; ++i) {
    for (std::size_t w = 0; w < P; ++w) {
      OrderedJson e;
      e["i"] = i;
      e["w"] = pattern_str(unsigned(w), sig.ell);
      e["p"] = sig.at(i, w);
      entries.push_back(std::move(e));
    }
  }
  root["entries"] = std::move(entries);
  return root.dump(2) + "\n";
}

SubwordSignature signature_from_json(std::string_view text) {
  OrderedJson root;
  try {
    root = OrderedJson::parse(text);
  } catch (const std::exception& e) {
    throw std::runtime_error(std::string("signature artifact: bad JSON: ") +
                             e.what());
  }
  if (!root.is_object() || !root.contains("n") || !root.contains("ell") ||
      !root.contains("delta") || !root.contains("entries"))
    throw std::runtime_error("signature artifact: missing fields");

  SubwordSignature sig;
  sig.n = root["n"].get<std::uint32_t>();
  sig.ell = root["ell"].get<std::uint32_t>();
  sig.delta = root["delta"].get<double>();
  check_shape(sig.n, sig.ell);
  const std::size_t P = sig.patterns();
  sig.p.assign(std::size_t(sig.n) * P, 0.0);
  std::vector<std::uint8_t> seen(sig.p.size(), 0);

  for (const auto& e : root["entries"]) {
    const auto i = e.at("i").get<std::uint64_t>();
    const std::string w = e.at("w").get<std::string>();
    if (i >= sig.n || w.size() != sig.ell)
      throw std::runtime_error("signature artifact: entry out of range");
    const std::size_t widx = pattern_from_str(w);
    const std::size_t k = i * P + widx;
    if (seen[k]) throw std::runtime_error("signature artifact: duplicate entry");
    seen[k] = 1;
    sig.p[k] = e.at("p").get<double>();
  }
  for (auto s : seen)
    if (!s) throw std::runtime_error("signature artifact: incomplete table");
  return sig;
}

std::string signature_to_csv(const SubwordSignature& sig) {
  check_shape(sig.n, sig.ell);
  std::string out = "i,w,p\n";
  const std::size_t P = sig.patterns();
  for (std::size_t i = 0; i < sig.n; ++i)
    for (std::size_t w = 0; w < P; ++w) {
      out += std::to_string(i);
      out += ',';
      out += pattern_str(unsigned(w), sig.ell);
      out += ',';
      out += format_double(sig.at(i, w));
      out += '\n';
    }
  return out;
}

SubwordSignature signature_from_csv(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  if (!std::getline(in, line) || line != "i,w,p")
    throw std::runtime_error("signature csv: missing header");

  struct Row {
    std::uint64_t i;
    std::string w;
    double p;
  };
  std::vector<Row> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto c1 = line.find(',');
    const auto c2 = line.find(',', c1 + 1);
    if (c1 == std::string::npos || c2 == std::string::npos)
      throw std::runtime_error("signature csv: bad row: " + line);
    Row r;
    r.i = std::stoull(line.substr(0, c1));
    r.w = line.substr(c1 + 1, c2 - c1 - 1);
    r.p = std::stod(line.substr(c2 + 1));
    rows.push_back(std::move(r));
  }
  if (rows.empty()) throw std::runtime_error("signature csv: no rows");

  const std::uint32_t ell = std::uint32_t(rows.front().w.size());
  std::uint32_t n = 0;
  for (const auto& r : rows) n = std::max(n, std::uint32_t(r.i) + 1);
  SubwordSignature sig;
  sig.n = n;
  sig.ell = ell;
  sig.delta = 0.0;  // csv carries no params; caller supplies them
  check_shape(n, ell);
  const std::size_t P = sig.patterns();
  sig.p.assign(std::size_t(n) * P, 0.0);
  std::vector<std::uint8_t> seen(sig.p.size(), 0);
  for (const auto& r : rows) {
    if (r.w.size() != ell)
      throw std::runtime_error("signature csv: ragged pattern width");
    const std::size_t k = r.i * P + pattern_from_str(r.w);
    if (seen[k]) throw std::runtime_error("signature csv: duplicate row");
    seen[k] = 1;
    sig.p[k] = r.p;
  }
  for (auto s : seen)
    if (!s) throw std::runtime_error("signature csv: incomplete table");
  return sig;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open for reading: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out.write(content.data(), std::streamsize(content.size()));
  if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace trsq
