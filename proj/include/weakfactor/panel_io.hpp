#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "weakfactor/types.hpp"

namespace weakfactor {

/// Shortest round-trip decimal rendering of a finite double ('.' decimal,
/// no locale). Parsing the result with parse_double recovers the exact
/// bit pattern.
std::string format_double(double v);
double parse_double(const std::string& field);

/// Panel CSV: N rows x T comma-separated columns, optional header row
/// ("t0,t1,..."). Round-trips bit-exactly for finite doubles.
void write_panel_csv(std::ostream& os, const PanelMatrix& panel,
                     bool header = false);
void write_panel_csv(const std::filesystem::path& path,
                     const PanelMatrix& panel, bool header = false);
/// Header presence is auto-detected (first field of first row not parseable
/// as a double).
PanelMatrix read_panel_csv(std::istream& is);
PanelMatrix read_panel_csv(const std::filesystem::path& path);

/// Binary container: 8-byte magic "WFPANEL1", two little-endian int64
/// dimensions, then row-major doubles.
void write_panel_binary(const std::filesystem::path& path,
                        const PanelMatrix& panel);
PanelMatrix read_panel_binary(const std::filesystem::path& path);

}  // namespace weakfactor
