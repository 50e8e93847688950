#include "rmatlas/mtf.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace rmatlas {

namespace {

using nlohmann::json;

static_assert(std::endian::native == std::endian::little, "MTF I/O assumes a little-endian host");

constexpr char kMagic[4] = {'M', 'T', 'F', '1'};

std::vector<std::string> component_names(FieldKind kind, int dim) {
  const char* axes = "xyz";
  std::vector<std::string> out;
  switch (kind) {
    case FieldKind::Metric:
    case FieldKind::Tensor: {
      const char* prefix = kind == FieldKind::Metric ? "g" : "d";
      for (int i = 0; i < dim; ++i)
        for (int j = i; j < dim; ++j) out.push_back(prefix + std::to_string(i + 1) + std::to_string(j + 1));
      break;
    }
    case FieldKind::Vector:
    case FieldKind::Displacement:
      for (int i = 0; i < dim; ++i) out.emplace_back(1, axes[i]);
      break;
    case FieldKind::Scalar:
      out.emplace_back("value");
      break;
    case FieldKind::Mask:
      out.emplace_back("mask");
      break;
  }
  return out;
}

json header_for(FieldKind kind, const Grid& g) {
  const int n = g.dim();
  json h;
  h["kind"] = to_string(kind);
  h["dim"] = n;
  h["shape"] = std::vector<int>(g.shape().begin(), g.shape().begin() + n);
  h["spacing"] = std::vector<double>(g.spacing().begin(), g.spacing().begin() + n);
  h["origin"] = std::vector<double>(g.origin().begin(), g.origin().begin() + n);
  h["component_order"] = component_names(kind, n);
  h["dtype"] = kind == FieldKind::Mask ? "u8" : "f64";
  return h;
}

const Grid& grid_of(const AnyField& f) {
  return std::visit([](const auto& x) -> const Grid& { return x.grid(); }, f);
}

void write_atomic(const std::string& path, const std::string& bytes) {
  const std::filesystem::path target(path);
  std::filesystem::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw MtfError("cannot open " + tmp.string() + " for writing");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw MtfError("write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, target, ec);
  if (ec) throw MtfError("cannot rename " + tmp.string() + " to " + path + ": " + ec.message());
}

}  // namespace

const char* to_string(FieldKind k) noexcept {
  switch (k) {
    case FieldKind::Metric:
      return "metric";
    case FieldKind::Tensor:
      return "tensor";
    case FieldKind::Scalar:
      return "scalar";
    case FieldKind::Vector:
      return "vector";
    case FieldKind::Mask:
      return "mask";
    case FieldKind::Displacement:
      return "displacement";
  }
  return "scalar";
}

FieldKind field_kind_from_string(const std::string& s) {
  for (FieldKind k : {FieldKind::Metric, FieldKind::Tensor, FieldKind::Scalar, FieldKind::Vector, FieldKind::Mask,
                      FieldKind::Displacement})
    if (s == to_string(k)) return k;
  throw MtfError("unknown field kind '" + s + "'");
}

std::string encode_mtf(const MtfData& data) {
  const Grid& g = grid_of(data.field);
  const std::string header = header_for(data.kind, g).dump();
  std::string out(kMagic, 4);
  const auto len = static_cast<std::uint32_t>(header.size());
  char len_bytes[4];
  std::memcpy(len_bytes, &len, 4);
  out.append(len_bytes, 4);
  out += header;
  if (const auto* m = std::get_if<MaskField>(&data.field)) {
    const auto d = m->data();
    out.append(reinterpret_cast<const char*>(d.data()), d.size());
  } else {
    std::visit(
        [&](const auto& f) {
          if constexpr (!std::is_same_v<std::decay_t<decltype(f)>, MaskField>) {
            const auto d = f.data();
            out.append(reinterpret_cast<const char*>(d.data()), d.size() * sizeof(double));
          }
        },
        data.field);
  }
  return out;
}

MtfData decode_mtf(const std::string& bytes, const std::string& origin) {
  if (bytes.size() < 8 || std::memcmp(bytes.data(), kMagic, 4) != 0)
    throw MtfError(origin + ": bad magic (not an MTF1 file)");
  std::uint32_t len = 0;
  std::memcpy(&len, bytes.data() + 4, 4);
  if (bytes.size() < 8 + static_cast<std::size_t>(len))
    throw MtfError(origin + ": truncated header (" + std::to_string(len) + " bytes declared, " +
                   std::to_string(bytes.size() - 8) + " available)");
  json h;
  try {
    h = json::parse(bytes.substr(8, len));
  } catch (const json::exception& e) {
    throw MtfError(origin + ": malformed header: " + e.what());
  }
  MtfData out;
  Grid grid;
  std::string dtype;
  try {
    out.kind = field_kind_from_string(h.at("kind").get<std::string>());
    const int dim = h.at("dim").get<int>();
    if (dim != 2 && dim != 3) throw MtfError(origin + ": dim must be 2 or 3");
    const auto shape = h.at("shape").get<std::vector<int>>();
    const auto spacing = h.at("spacing").get<std::vector<double>>();
    const auto org = h.at("origin").get<std::vector<double>>();
    if (shape.size() != static_cast<std::size_t>(dim) || spacing.size() != shape.size() || org.size() != shape.size())
      throw MtfError(origin + ": dimension mismatch between dim and shape/spacing/origin");
    Index3 sh{1, 1, 1};
    std::array<double, 3> sp{1, 1, 1}, o{0, 0, 0};
    for (int i = 0; i < dim; ++i) {
      sh[i] = shape[i];
      sp[i] = spacing[i];
      o[i] = org[i];
    }
    grid = Grid(dim, sh, sp, o);
    dtype = h.at("dtype").get<std::string>();
    if (h.at("component_order").get<std::vector<std::string>>() != component_names(out.kind, dim))
      throw MtfError(origin + ": unexpected component_order for kind " + to_string(out.kind));
  } catch (const json::exception& e) {
    throw MtfError(origin + ": invalid header: " + e.what());
  } catch (const MtfError&) {
    throw;
  } catch (const Error& e) {
    throw MtfError(origin + ": invalid grid: " + e.what());
  }
  const std::string expected_dtype = out.kind == FieldKind::Mask ? "u8" : "f64";
  if (dtype != expected_dtype)
    throw MtfError(origin + ": type mismatch: kind " + to_string(out.kind) + " requires dtype " + expected_dtype +
                   ", file has " + dtype);

  const std::size_t ncomp = component_names(out.kind, grid.dim()).size();
  const std::size_t elem = out.kind == FieldKind::Mask ? 1 : sizeof(double);
  const std::size_t expected = grid.size() * ncomp * elem;
  const std::size_t actual = bytes.size() - 8 - len;
  if (actual != expected)
    throw MtfError(origin + ": payload size mismatch: expected " + std::to_string(expected) + " bytes, found " +
                   std::to_string(actual));
  const char* payload = bytes.data() + 8 + len;

  auto fill = [&](auto field) {
    auto d = field.data();
    std::memcpy(d.data(), payload, expected);
    return field;
  };
  switch (out.kind) {
    case FieldKind::Metric:
    case FieldKind::Tensor: {
      MetricField m = fill(MetricField(grid));
      m.set_spd_flag(false);
      out.field = std::move(m);
      break;
    }
    case FieldKind::Vector:
    case FieldKind::Displacement:
      out.field = fill(VectorField(grid));
      break;
    case FieldKind::Scalar:
      out.field = fill(ScalarField(grid));
      break;
    case FieldKind::Mask: {
      MaskField m = fill(MaskField(grid));
      for (auto b : m.data())
        if (b > 1) throw MtfError(origin + ": mask values must be 0 or 1");
      out.field = std::move(m);
      break;
    }
  }
  return out;
}

void write_mtf(const std::string& path, const MetricField& f, FieldKind kind) {
  if (kind != FieldKind::Metric && kind != FieldKind::Tensor) throw MtfError("metric fields need kind metric or tensor");
  write_atomic(path, encode_mtf({kind, f}));
}

void write_mtf(const std::string& path, const VectorField& f, FieldKind kind) {
  if (kind != FieldKind::Vector && kind != FieldKind::Displacement)
    throw MtfError("vector fields need kind vector or displacement");
  write_atomic(path, encode_mtf({kind, f}));
}

void write_mtf(const std::string& path, const ScalarField& f) { write_atomic(path, encode_mtf({FieldKind::Scalar, f})); }

void write_mtf(const std::string& path, const MaskField& f) { write_atomic(path, encode_mtf({FieldKind::Mask, f})); }

MtfData read_mtf(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MtfError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return decode_mtf(ss.str(), path);
}

namespace {

template <typename T>
T take(MtfData&& d, const std::string& path, const char* wanted) {
  if (auto* f = std::get_if<T>(&d.field)) return std::move(*f);
  throw MtfError(path + ": type mismatch: expected " + wanted + ", file holds kind " + to_string(d.kind));
}

}  // namespace

MetricField read_metric(const std::string& path) { return take<MetricField>(read_mtf(path), path, "metric/tensor"); }
VectorField read_vector(const std::string& path) { return take<VectorField>(read_mtf(path), path, "vector/displacement"); }
ScalarField read_scalar(const std::string& path) { return take<ScalarField>(read_mtf(path), path, "scalar"); }
MaskField read_mask(const std::string& path) { return take<MaskField>(read_mtf(path), path, "mask"); }

}  // namespace rmatlas
