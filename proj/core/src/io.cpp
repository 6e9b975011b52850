#include "shubin/io.hpp"

#include <cinttypes>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include <unistd.h>

#include "shubin/errors.hpp"

namespace shubin {

void atomic_write(const std::filesystem::path& path, const std::string& content) {
  namespace fs = std::filesystem;
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw error("cannot open for writing: " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw error("write failed: " + tmp.string());
  }
  fs::rename(tmp, path);
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string spectrum_csv(const SpectralDecomposition& dec) {
  std::ostringstream os;
  os << "j,lambda,residual\n";
  for (int j = 1; j <= dec.J_trusted; ++j)
    os << j << "," << format_double(dec.eigenvalues(j - 1)) << ","
       << format_double(dec.residuals(j - 1)) << "\n";
  return os.str();
}

std::string weyl_csv(const WeylFit& fit) {
  std::ostringstream os;
  os << "exponent_hat,prefactor_hat,exponent_theory,window_lo,window_hi,residual\n";
  os << format_double(fit.exponent_hat) << "," << format_double(fit.prefactor_hat) << ","
     << format_double(fit.exponent_theory) << "," << fit.window_lo << "," << fit.window_hi
     << "," << format_double(fit.residual) << "\n";
  return os.str();
}

std::string coefficients_csv(const ExpansionCoefficients& c) {
  std::ostringstream os;
  os << "j,re,im,abs\n";
  for (int j = 1; j <= c.count(); ++j)
    os << j << "," << format_double(c.values(j - 1).real()) << ","
       << format_double(c.values(j - 1).imag()) << ","
       << format_double(std::abs(c.values(j - 1))) << "\n";
  return os.str();
}

std::string iterates_csv(const IterateSeries& s) {
  std::ostringstream os;
  os << "M,log_norm\n";
  for (int M = 0; M <= s.M_max; ++M)
    os << M << "," << format_double(s.log_norms(M)) << "\n";
  return os.str();
}

ExpansionCoefficients parse_coefficients_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw parse_error("empty coefficients CSV", 0);
  std::vector<cxd> vals;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string tok;
    std::vector<std::string> fields;
    while (std::getline(ls, tok, ',')) fields.push_back(tok);
    if (fields.size() < 3) throw parse_error("coefficients CSV needs j,re,im", lineno);
    try {
      long j = std::stol(fields[0]);
      double re = std::stod(fields[1]);
      double im = std::stod(fields[2]);
      if (j != static_cast<long>(vals.size()) + 1)
        throw parse_error("coefficient rows must be consecutive from j=1", lineno);
      vals.emplace_back(re, im);
    } catch (const parse_error&) {
      throw;
    } catch (const std::exception&) {
      throw parse_error("bad numeric field", lineno);
    }
  }
  ExpansionCoefficients out;
  out.values = Eigen::Map<const VectorXcd>(vals.data(), static_cast<Eigen::Index>(vals.size()));
  return out;
}

namespace {
constexpr char kMagic[8] = {'S', 'H', 'B', 'D', '0', '0', '0', '1'};
}

void save_decomposition(const std::filesystem::path& path, const SpectralDecomposition& dec) {
  std::ostringstream os(std::ios::binary);
  os.write(kMagic, 8);
  auto put = [&os](const void* p, size_t len) {
    os.write(static_cast<const char*>(p), static_cast<std::streamsize>(len));
  };
  std::int64_t meta[6] = {dec.spec.n,    dec.spec.N,      dec.spec.pad,
                          dec.J_trusted, dec.count(),     static_cast<std::int64_t>(dec.eigenvectors.rows())};
  put(meta, sizeof meta);
  put(&dec.signature, sizeof dec.signature);
  put(dec.eigenvalues.data(), sizeof(double) * static_cast<size_t>(dec.count()));
  put(dec.residuals.data(), sizeof(double) * static_cast<size_t>(dec.count()));
  put(dec.eigenvectors.data(),
      sizeof(double) * static_cast<size_t>(dec.eigenvectors.size()));
  atomic_write(path, os.str());
}

std::optional<SpectralDecomposition> load_decomposition(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  char magic[8];
  if (!in.read(magic, 8) || std::memcmp(magic, kMagic, 8) != 0) return std::nullopt;
  std::int64_t meta[6];
  if (!in.read(reinterpret_cast<char*>(meta), sizeof meta)) return std::nullopt;
  SpectralDecomposition dec;
  try {
    dec.spec = BasisSpec(static_cast<int>(meta[0]), static_cast<int>(meta[1]),
                         static_cast<int>(meta[2]));
  } catch (const error&) {
    return std::nullopt;
  }
  dec.J_trusted = static_cast<int>(meta[3]);
  long J = meta[4], rows = meta[5];
  if (J < 1 || rows != dec.spec.total() || dec.J_trusted > J) return std::nullopt;
  if (!in.read(reinterpret_cast<char*>(&dec.signature), sizeof dec.signature))
    return std::nullopt;
  dec.eigenvalues = VectorXd(J);
  dec.residuals = VectorXd(J);
  dec.eigenvectors = MatrixXd(rows, J);
  if (!in.read(reinterpret_cast<char*>(dec.eigenvalues.data()),
               static_cast<std::streamsize>(sizeof(double) * static_cast<size_t>(J))))
    return std::nullopt;
  if (!in.read(reinterpret_cast<char*>(dec.residuals.data()),
               static_cast<std::streamsize>(sizeof(double) * static_cast<size_t>(J))))
    return std::nullopt;
  if (!in.read(reinterpret_cast<char*>(dec.eigenvectors.data()),
               static_cast<std::streamsize>(sizeof(double) * static_cast<size_t>(rows * J))))
    return std::nullopt;
  return dec;
}

std::string cache_key(std::uint64_t op_hash, int J, double tol, int N_override) {
  char buf[128];
  std::snprintf(buf, sizeof buf, "dec_%016" PRIx64 "_J%d_tol%.3e_N%d.bin", op_hash, J, tol,
                N_override);
  return buf;
}

}  // namespace shubin
