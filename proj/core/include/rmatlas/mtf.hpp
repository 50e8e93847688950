#pragma once

#include <string>
#include <variant>

#include "rmatlas/error.hpp"
#include "rmatlas/fields.hpp"

namespace rmatlas {

/// MTF1 container: "MTF1", u32 LE header length, JSON header, LE payload.
enum class FieldKind { Metric, Tensor, Scalar, Vector, Mask, Displacement };

const char* to_string(FieldKind k) noexcept;
FieldKind field_kind_from_string(const std::string& s);

class MtfError : public Error {
 public:
  using Error::Error;
};

using AnyField = std::variant<ScalarField, VectorField, MetricField, MaskField>;

struct MtfData {
  FieldKind kind = FieldKind::Scalar;
  AnyField field;
};

/// Writes atomically (temporary file + rename).
void write_mtf(const std::string& path, const MetricField& f, FieldKind kind = FieldKind::Metric);
void write_mtf(const std::string& path, const VectorField& f, FieldKind kind = FieldKind::Vector);
void write_mtf(const std::string& path, const ScalarField& f);
void write_mtf(const std::string& path, const MaskField& f);

/// Throws MtfError on bad magic, malformed header, dtype/kind mismatch or a
/// payload whose size disagrees with the header.
MtfData read_mtf(const std::string& path);

/// Typed readers; throw MtfError when the file holds another kind.
MetricField read_metric(const std::string& path);  // kind metric or tensor
VectorField read_vector(const std::string& path);  // kind vector or displacement
ScalarField read_scalar(const std::string& path);
MaskField read_mask(const std::string& path);

/// Serialized bytes of a field (what write_mtf puts on disk).
std::string encode_mtf(const MtfData& data);
MtfData decode_mtf(const std::string& bytes, const std::string& origin = "<memory>");

}  // namespace rmatlas
