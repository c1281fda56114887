#include "nlfp/io.hpp"

#include <array>
#include <bit>
#include <charconv>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

#include "json.hpp"
#include "nlfp/error.hpp"

namespace nlfp {

namespace {

using json = nlohmann::json;

void append_double(std::string& out, double v) {
  std::array<char, 32> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  require(res.ec == std::errc(), "write_field: cannot format value");
  out.append(buf.data(), res.ptr);
}

double parse_double(std::string_view s, const std::filesystem::path& path, std::size_t line) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  require(res.ec == std::errc() && res.ptr == s.data() + s.size(),
          "read_field: bad number '" + std::string(s) + "' at " + path.string() + ":" + std::to_string(line));
  return v;
}

std::uint64_t to_little(std::uint64_t bits) {
  if constexpr (std::endian::native == std::endian::little) return bits;
  std::uint64_t out = 0;
  for (int b = 0; b < 8; ++b) out |= ((bits >> (8 * b)) & 0xffu) << (8 * (7 - b));
  return out;
}

const char* topology_name(Topology t) { return t == Topology::periodic ? "periodic" : "truncated"; }

Topology parse_topology(const std::string& s, const std::string& key) {
  if (s == "periodic") return Topology::periodic;
  if (s == "truncated") return Topology::truncated;
  throw Error("read_field: sidecar key '" + key + "' must be periodic or truncated");
}

// Fetches a sidecar key, naming it on absence or type mismatch.
template <class T>
T sidecar_get(const json& doc, const std::string& key) {
  require(doc.contains(key), "read_field: sidecar missing key '" + key + "'");
  try {
    return doc.at(key).get<T>();
  } catch (const json::exception&) {
    throw Error("read_field: sidecar key '" + key + "' has the wrong type");
  }
}

void write_csv(const Field& f, const std::filesystem::path& path) {
  const Axis& a = f.grid.axis(0);
  std::string out = "x,u\n";
  out.reserve(f.size() * 48);
  for (std::size_t i = 0; i < f.size(); ++i) {
    append_double(out, a.coord(i));
    out.push_back(',');
    append_double(out, f[i]);
    out.push_back('\n');
  }
  std::ofstream os(path, std::ios::binary);
  require(static_cast<bool>(os), "write_field: cannot open " + path.string());
  os.write(out.data(), static_cast<std::streamsize>(out.size()));
  require(static_cast<bool>(os), "write_field: write failed for " + path.string());
}

Field read_csv(const std::filesystem::path& path, Topology topology) {
  std::ifstream is(path, std::ios::binary);
  require(static_cast<bool>(is), "read_field: cannot open " + path.string());
  std::string line;
  require(static_cast<bool>(std::getline(is, line)) && line == "x,u",
          "read_field: " + path.string() + " lacks the 'x,u' header");
  std::vector<double> xs, us;
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto comma = line.find(',');
    require(comma != std::string::npos, "read_field: missing comma at " + path.string() + ":" + std::to_string(lineno));
    const std::string_view sv(line);
    xs.push_back(parse_double(sv.substr(0, comma), path, lineno));
    us.push_back(parse_double(sv.substr(comma + 1), path, lineno));
  }
  require(xs.size() >= 2, "read_field: " + path.string() + " needs at least two rows");
  Axis axis{xs.size(), xs.front(), xs.back(), topology};
  return Field(GridSpec(axis), std::move(us));
}

void write_raw(const Field& f, const std::filesystem::path& path) {
  std::vector<std::uint64_t> words(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) words[i] = to_little(std::bit_cast<std::uint64_t>(f[i]));
  {
    std::ofstream os(path, std::ios::binary);
    require(static_cast<bool>(os), "write_field: cannot open " + path.string());
    os.write(reinterpret_cast<const char*>(words.data()), static_cast<std::streamsize>(words.size() * 8));
    require(static_cast<bool>(os), "write_field: write failed for " + path.string());
  }
  const Axis& ax = f.grid.axis(0);
  const Axis& ay = f.grid.axis(1);
  json doc;
  doc["shape"] = {ax.n, ay.n};
  doc["lower"] = {ax.lower, ay.lower};
  doc["upper"] = {ax.upper, ay.upper};
  doc["topology"] = {topology_name(ax.topology), topology_name(ay.topology)};
  doc["axis_order"] = "x-major";
  doc["dtype"] = "<f8";
  std::ofstream side(sidecar_path(path), std::ios::binary);
  require(static_cast<bool>(side), "write_field: cannot open " + sidecar_path(path).string());
  side << doc.dump(2) << '\n';
}

Field read_raw(const std::filesystem::path& path) {
  const auto side_path = sidecar_path(path);
  std::ifstream side(side_path, std::ios::binary);
  require(static_cast<bool>(side), "read_field: cannot open sidecar " + side_path.string());
  json doc;
  try {
    doc = json::parse(side);
  } catch (const json::exception& e) {
    throw Error("read_field: sidecar " + side_path.string() + " is not valid JSON: " + e.what());
  }
  require(doc.is_object(), "read_field: sidecar must be a JSON object");
  const auto shape = sidecar_get<std::vector<std::size_t>>(doc, "shape");
  const auto lower = sidecar_get<std::vector<double>>(doc, "lower");
  const auto upper = sidecar_get<std::vector<double>>(doc, "upper");
  const auto topo = sidecar_get<std::vector<std::string>>(doc, "topology");
  require(shape.size() == 2, "read_field: sidecar key 'shape' must have two entries");
  require(lower.size() == 2, "read_field: sidecar key 'lower' must have two entries");
  require(upper.size() == 2, "read_field: sidecar key 'upper' must have two entries");
  require(topo.size() == 2, "read_field: sidecar key 'topology' must have two entries");
  require(sidecar_get<std::string>(doc, "axis_order") == "x-major",
          "read_field: sidecar key 'axis_order' must be x-major");
  require(sidecar_get<std::string>(doc, "dtype") == "<f8", "read_field: sidecar key 'dtype' must be <f8");

  GridSpec grid(Axis{shape[0], lower[0], upper[0], parse_topology(topo[0], "topology")},
                Axis{shape[1], lower[1], upper[1], parse_topology(topo[1], "topology")});
  std::ifstream is(path, std::ios::binary | std::ios::ate);
  require(static_cast<bool>(is), "read_field: cannot open " + path.string());
  const auto bytes = static_cast<std::size_t>(is.tellg());
  require(bytes == grid.size() * 8, "read_field: raw size of " + path.string() + " does not match sidecar key 'shape'");
  is.seekg(0);
  std::vector<std::uint64_t> words(grid.size());
  is.read(reinterpret_cast<char*>(words.data()), static_cast<std::streamsize>(bytes));
  std::vector<double> values(words.size());
  for (std::size_t i = 0; i < words.size(); ++i) values[i] = std::bit_cast<double>(to_little(words[i]));
  return Field(std::move(grid), std::move(values));
}

}  // namespace

std::filesystem::path sidecar_path(const std::filesystem::path& raw) {
  auto p = raw;
  p += ".json";
  return p;
}

void write_field(const Field& f, const std::filesystem::path& path) {
  require(f.grid.dim() == 1 || f.grid.dim() == 2, "write_field: field has no grid");
  require(f.values.size() == f.grid.size(), "write_field: value count does not match grid");
  if (f.grid.dim() == 1)
    write_csv(f, path);
  else
    write_raw(f, path);
}

Field read_field(const std::filesystem::path& path, Topology topology) {
  if (std::filesystem::exists(sidecar_path(path))) return read_raw(path);
  return read_csv(path, topology);
}

}  // namespace nlfp
