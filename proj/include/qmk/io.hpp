#pragma once

#include <charconv>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "qmk/linalg.hpp"
#include "qmk/states.hpp"

namespace qmk {

inline constexpr const char* kVersion = "0.1.0";

/// Shortest decimal that round-trips the double exactly.
inline std::string format_double(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

/// FNV-1a 64-bit hash, hex encoded; stable across platforms for embedding a
/// configuration fingerprint in output files.
inline std::string fnv1a_hex(const std::string& text) {
  std::uint64_t hash = 0xcbf29ce484222325ull;
  for (unsigned char c : text) {
    hash ^= c;
    hash *= 0x100000001b3ull;
  }
  std::ostringstream out;
  out << std::hex << hash;
  return out.str();
}

inline nlohmann::json matrix_to_json(const Matrix& m) {
  nlohmann::json re = nlohmann::json::array(), im = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    nlohmann::json row_re = nlohmann::json::array(), row_im = nlohmann::json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      row_re.push_back(m(i, j).real());
      row_im.push_back(m(i, j).imag());
    }
    re.push_back(row_re);
    im.push_back(row_im);
  }
  return {{"re", re}, {"im", im}};
}

inline Matrix matrix_from_json(const nlohmann::json& j) {
  if (!j.contains("re")) throw std::invalid_argument("matrix json: missing re");
  const auto& re = j.at("re");
  const Eigen::Index rows = static_cast<Eigen::Index>(re.size());
  if (rows == 0) throw std::invalid_argument("matrix json: empty");
  const Eigen::Index cols = static_cast<Eigen::Index>(re.at(0).size());
  Matrix m(rows, cols);
  const bool has_im = j.contains("im");
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index k = 0; k < cols; ++k) {
      const double real = re.at(i).at(k).get<double>();
      const double imag = has_im ? j.at("im").at(i).at(k).get<double>() : 0.0;
      m(i, k) = Complex(real, imag);
    }
  }
  return m;
}

/// Density specification consumed by the command-line tool:
///   {"hbar": r, "d": n, "kind": "coherent_mixture" | "fock_matrix",
///    "points": [{"q": [..], "p": [..], "w": r}, ...],
///    "matrix": {"re": [[..]], "im": [[..]]}}
struct DensitySpec {
  double hbar = 1.0;
  int dim_d = 1;
  enum class Kind { coherent_mixture, fock_matrix } kind = Kind::coherent_mixture;
  PhaseSpaceMeasure measure;  // kind == coherent_mixture
  Matrix matrix;              // kind == fock_matrix
};

inline DensitySpec parse_density_spec(const nlohmann::json& j) {
  DensitySpec spec;
  spec.hbar = j.at("hbar").get<double>();
  spec.dim_d = j.at("d").get<int>();
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "coherent_mixture") {
    spec.kind = DensitySpec::Kind::coherent_mixture;
    for (const auto& pt : j.at("points")) {
      PhasePoint point;
      const auto& q = pt.at("q");
      const auto& p = pt.at("p");
      if (static_cast<int>(q.size()) != spec.dim_d ||
          static_cast<int>(p.size()) != spec.dim_d) {
        throw std::invalid_argument("density spec: point dimension mismatch");
      }
      point.q.resize(spec.dim_d);
      point.p.resize(spec.dim_d);
      for (int k = 0; k < spec.dim_d; ++k) {
        point.q[k] = q.at(k).get<double>();
        point.p[k] = p.at(k).get<double>();
      }
      spec.measure.points.push_back(point);
      spec.measure.weights.push_back(pt.at("w").get<double>());
    }
    validate_measure(spec.measure);
  } else if (kind == "fock_matrix") {
    spec.kind = DensitySpec::Kind::fock_matrix;
    spec.matrix = matrix_from_json(j.at("matrix"));
    if (spec.matrix.rows() != spec.matrix.cols()) {
      throw std::invalid_argument("density spec: matrix not square");
    }
  } else {
    throw std::invalid_argument("density spec: unknown kind '" + kind + "'");
  }
  return spec;
}

inline DensitySpec load_density_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open input file: " + path);
  nlohmann::json j;
  in >> j;
  return parse_density_spec(j);
}

inline nlohmann::json density_spec_to_json(const DensitySpec& spec) {
  nlohmann::json j;
  j["hbar"] = spec.hbar;
  j["d"] = spec.dim_d;
  if (spec.kind == DensitySpec::Kind::coherent_mixture) {
    j["kind"] = "coherent_mixture";
    nlohmann::json points = nlohmann::json::array();
    for (std::size_t k = 0; k < spec.measure.points.size(); ++k) {
      nlohmann::json pt;
      pt["q"] = std::vector<double>(spec.measure.points[k].q.data(),
                                    spec.measure.points[k].q.data() + spec.dim_d);
      pt["p"] = std::vector<double>(spec.measure.points[k].p.data(),
                                    spec.measure.points[k].p.data() + spec.dim_d);
      pt["w"] = spec.measure.weights[k];
      points.push_back(pt);
    }
    j["points"] = points;
  } else {
    j["kind"] = "fock_matrix";
    j["matrix"] = matrix_to_json(spec.matrix);
  }
  return j;
}

/// Realizes a spec as a density operator on the given space (quantizing the
/// mixture, or validating and renormalizing a raw matrix).
inline DensityOperator realize_density(const DensitySpec& spec,
                                       const FockSpace& space,
                                       double tail_tol = 1e-10) {
  if (spec.kind == DensitySpec::Kind::coherent_mixture) {
    return toeplitz_quantize(spec.measure, space, tail_tol);
  }
  if (spec.matrix.rows() != space.dim()) {
    throw std::invalid_argument("density spec: matrix dimension does not match cutoff");
  }
  DensityOperator rho{space, hermitize(spec.matrix), "fock_matrix"};
  const double tr = real_trace(rho.matrix);
  if (std::abs(tr - 1.0) > 1e-6) {
    throw std::invalid_argument("density spec: matrix trace differs from one");
  }
  rho.matrix /= tr;
  validate_density(rho, {1e-8, 1e-8, 1e-8});
  return rho;
}

}  // namespace qmk
