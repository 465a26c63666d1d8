#include "isingmc/io.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>
#include <vector>

namespace isingmc {

namespace {

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(sep, start);
    out.push_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\r' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\r' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

template <class T>
T parse_number(std::string_view s, const std::string& origin, std::size_t line_no) {
  s = trim(s);
  T v{};
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || ptr != end) {
    throw IoError(origin + ":" + std::to_string(line_no) + ": cannot parse '" + std::string(s) + "'");
  }
  return v;
}

template <class Fn>
void for_each_line(std::string_view text, Fn&& fn) {
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto pos = text.find('\n');
    std::string_view line = text.substr(0, pos);
    ++line_no;
    fn(trim(line), line_no);
    if (pos == std::string_view::npos) break;
    text.remove_prefix(pos + 1);
  }
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file_atomic(const std::filesystem::path& path, std::string_view content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw IoError("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

Theta parse_theta_tsv(std::string_view text, std::optional<int> d, const std::string& origin) {
  struct Entry {
    int r, s;
    double v;
  };
  std::vector<Entry> entries;
  bool header_seen = false;
  int max_vertex = 0;
  for_each_line(text, [&](std::string_view line, std::size_t line_no) {
    if (line.empty() || line.front() == '#') return;
    const auto cols = split(line, '\t');
    if (!header_seen) {
      header_seen = true;
      if (cols.size() >= 3 && trim(cols[0]) == "r") return;
      throw IoError(origin + ": missing 'r\\ts\\tvalue' header");
    }
    if (cols.size() != 3) throw IoError(origin + ":" + std::to_string(line_no) + ": expected 3 columns");
    Entry e{parse_number<int>(cols[0], origin, line_no), parse_number<int>(cols[1], origin, line_no),
            parse_number<double>(cols[2], origin, line_no)};
    if (e.r < 1 || e.r >= e.s) throw IoError(origin + ":" + std::to_string(line_no) + ": need 1 <= r < s");
    max_vertex = std::max(max_vertex, e.s);
    entries.push_back(e);
  });
  if (!header_seen) throw IoError(origin + ": empty theta file");
  const int dim = d.value_or(std::max(max_vertex, 2));
  if (max_vertex > dim) {
    throw IoError(origin + ": vertex " + std::to_string(max_vertex) + " exceeds d=" + std::to_string(dim));
  }
  Theta theta(dim);
  std::vector<char> seen(theta.size(), 0);
  for (const auto& e : entries) {
    const auto linear = edge_index(e.r, e.s, dim).linear;
    if (seen[linear]) {
      throw IoError(origin + ": pair (" + std::to_string(e.r) + ", " + std::to_string(e.s) + ") listed twice");
    }
    seen[linear] = 1;
    theta[linear] = e.v;
  }
  if (!theta.all_finite()) throw IoError(origin + ": non-finite value");
  return theta;
}

Theta read_theta_tsv(const std::filesystem::path& path, std::optional<int> d) {
  return parse_theta_tsv(read_file(path), d, path.string());
}

std::string format_theta_tsv(const Theta& theta, bool include_zeros) {
  std::string out = "r\ts\tvalue\n";
  for (std::size_t e = 0; e < theta.size(); ++e) {
    if (!include_zeros && theta[e] == 0.0) continue;
    const auto idx = edge_from_linear(e, theta.dim());
    out += std::to_string(idx.r) + '\t' + std::to_string(idx.s) + '\t' + format_double(theta[e]) + '\n';
  }
  return out;
}

Dataset parse_dataset_csv(std::string_view text, const std::string& origin) {
  std::vector<Spin> flat;
  int d = -1;
  std::size_t n = 0;
  for_each_line(text, [&](std::string_view line, std::size_t line_no) {
    if (line.empty() || line.front() == '#') return;
    const auto cols = split(line, ',');
    if (d < 0) d = static_cast<int>(cols.size());
    if (static_cast<int>(cols.size()) != d) {
      throw IoError(origin + ":" + std::to_string(line_no) + ": expected " + std::to_string(d) + " columns");
    }
    for (auto c : cols) {
      const int v = parse_number<int>(c, origin, line_no);
      if (v != 1 && v != -1) throw IoError(origin + ":" + std::to_string(line_no) + ": entries must be -1 or 1");
      flat.push_back(static_cast<Spin>(v));
    }
    ++n;
  });
  if (n == 0) throw IoError(origin + ": no observations");
  if (d < 2) throw IoError(origin + ": need at least 2 columns");
  return Dataset(d, n, std::move(flat));
}

Dataset read_dataset_csv(const std::filesystem::path& path) { return parse_dataset_csv(read_file(path), path.string()); }

std::string format_dataset_csv(const Dataset& data) {
  std::string out;
  out.reserve(data.size() * static_cast<std::size_t>(data.dim()) * 3);
  for (std::size_t i = 0; i < data.size(); ++i) {
    for (int s = 0; s < data.dim(); ++s) {
      if (s) out += ',';
      out += data.at(i, s) == 1 ? "1" : "-1";
    }
    out += '\n';
  }
  return out;
}

}  // namespace isingmc
