#pragma once

// PGM/PPM readers and writers, plain-text matrix files for level-set
// functions, and the curve CSV exporter. All writers produce deterministic
// bytes for identical inputs.

#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "varflow/curve.hpp"
#include "varflow/grid.hpp"

namespace varflow {

enum class IoErrorCode {
    FileNotFound,
    MalformedHeader,
    TruncatedPayload,
    UnsupportedMaxval,
    UnsupportedFormat,
    Unwritable,
};

class IoError : public std::runtime_error {
public:
    IoError(IoErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
    IoErrorCode code() const { return code_; }

private:
    IoErrorCode code_;
};

/// PGM (P2/P5) yields one field, PPM (P3/P6) yields three; values scaled to
/// [0, 1] by maxval. maxval up to 65535 (two-byte big-endian samples in
/// binary variants).
std::vector<ScalarField> read_image(const std::string& path);

/// Clamp to [0,1], quantize by round(v * maxval), write binary P5
/// (two-byte big-endian samples when maxval > 255).
void write_pgm(const ScalarField& field, const std::string& path, int maxval = 255);

/// Binary P6 from three channels sharing one spec.
void write_ppm(const std::vector<ScalarField>& channels, const std::string& path, int maxval = 255);

/// Plain-text matrix: first line "nx ny", then ny rows of nx values (%.9g).
void write_matrix(const ScalarField& field, const std::string& path);
ScalarField read_matrix(const std::string& path);

/// Header "step,node,x,y", 9-significant-digit decimals, rows ordered by
/// (step, node).
void export_curve_csv(const std::vector<std::pair<int, ClosedCurve>>& curves,
                      const std::string& path);

/// FNV-1a 64-bit digest of a file, as 16 hex characters (used in manifests).
std::string file_fnv64(const std::string& path);

std::string read_file_bytes(const std::string& path);

}  // namespace varflow
