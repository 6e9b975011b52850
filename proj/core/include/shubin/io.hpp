#ifndef SHUBIN_IO_HPP
#define SHUBIN_IO_HPP

#include <filesystem>
#include <optional>
#include <string>

#include "shubin/classify.hpp"
#include "shubin/spectral.hpp"

namespace shubin {

/// Write-temp-then-rename; no partially written file is ever observable
/// under the final name. LF line endings, '.' decimal separator.
void atomic_write(const std::filesystem::path& path, const std::string& content);

std::string format_double(double v);  // shortest round-trip decimal

/// CSV bodies (header row mandatory).
std::string spectrum_csv(const SpectralDecomposition& dec);
std::string weyl_csv(const WeylFit& fit);
std::string coefficients_csv(const ExpansionCoefficients& c);
std::string iterates_csv(const IterateSeries& s);

/// Parse a coefficients CSV (j,re,im[,abs]) back into eigen-coefficients.
ExpansionCoefficients parse_coefficients_csv(const std::string& text);

/// Binary cache of a decomposition, content-keyed by
/// (operator hash, truncation request, J, tol). Corrupt or mismatched files
/// read as "absent".
void save_decomposition(const std::filesystem::path& path, const SpectralDecomposition& dec);
std::optional<SpectralDecomposition> load_decomposition(const std::filesystem::path& path);

std::string cache_key(std::uint64_t op_hash, int J, double tol, int N_override);

}  // namespace shubin

#endif
