#pragma once

#include <string>

#include "momentpde/conic.hpp"

namespace momentpde {

/// Serialize as SDPA sparse format (.dat-s). The free moment variables map
/// to the SDPA decision variables; each PSD block is written as-is and the
/// equality rows A s = b are encoded as the pair of diagonal blocks
/// diag(A s - b) >= 0, diag(b - A s) >= 0, recorded in a header comment so
/// that import can reconstruct them exactly. Output ordering is fixed, so
/// identical problems serialize to identical bytes.
std::string export_sdpa(const ConicProblem& p);

/// Parse SDPA sparse format. Files produced by export_sdpa round-trip to a
/// structurally identical problem; foreign files are accepted with diagonal
/// blocks mapped to 1x1 PSD blocks.
ConicProblem import_sdpa(const std::string& text);

void write_sdpa_file(const std::string& path, const ConicProblem& p);
ConicProblem read_sdpa_file(const std::string& path);

}  // namespace momentpde
