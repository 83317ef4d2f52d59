#include "rotspec/crystalfield.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <sstream>

#include "rotspec/angular.hpp"
#include "rotspec/errors.hpp"

namespace rotspec {

void CrystalField::validate() const {
  if (!std::isfinite(v2_cm1) || !std::isfinite(v4_cm1))
    throw ValidationError("crystal field strengths must be finite");
  if (jmax < 4) throw ValidationError("crystal field jmax must be >= 4");
}

bool LevelDiagram::has(int j, int abs_mj) const {
  for (const auto& e : entries)
    if (e.j == j && e.abs_mj == abs_mj) return true;
  return false;
}

const LevelEntry& LevelDiagram::find(int j, int abs_mj) const {
  for (const auto& e : entries)
    if (e.j == j && e.abs_mj == abs_mj) return e;
  std::ostringstream os;
  os << "level (J=" << j << ", |mJ|=" << abs_mj << ") not in diagram";
  throw ValidationError(os.str());
}

double LevelDiagram::energy(int j, int abs_mj) const { return find(j, abs_mj).energy_cm1; }

int LevelDiagram::max_j() const {
  int m = -1;
  for (const auto& e : entries) m = std::max(m, e.j);
  return m;
}

void LevelDiagram::validate() const {
  int prev_j = -1, prev_m = -1;
  for (const auto& e : entries) {
    if (e.abs_mj < 0 || e.abs_mj > e.j) throw ValidationError("level with |mJ| > J");
    const int want = e.abs_mj == 0 ? 1 : 2;
    if (e.degeneracy != want) throw ValidationError("level with wrong degeneracy");
    if (e.j < prev_j || (e.j == prev_j && e.abs_mj <= prev_m))
      throw ValidationError("diagram entries not sorted by (J, |mJ|)");
    prev_j = e.j;
    prev_m = e.abs_mj;
  }
  // Within each complete J manifold the degeneracies must add up to 2J+1.
  for (const auto& e : entries) {
    if (e.abs_mj != 0) continue;
    int total = 0, count = 0;
    for (const auto& o : entries)
      if (o.j == e.j) { total += o.degeneracy; ++count; }
    if (count == e.j + 1 && total != 2 * e.j + 1)
      throw ValidationError("degeneracy sum within J manifold != 2J+1");
  }
}

double p2_expectation(int j, int mj) {
  if (j < 0) throw ValidationError("p2_expectation: J must be >= 0");
  if (std::abs(mj) > j) throw ValidationError("p2_expectation: |mJ| > J");
  return angular::p2_diagonal(j, mj);
}

namespace {

double p4_diagonal(int j, int m, int nodes) {
  return angular::legendre_matrix_element_quadrature(j, j, m, 4, nodes);
}

LevelDiagram diagonalize(const Isotope& iso, const CrystalField& field, int jmax,
                         int j_report) {
  // Gauss-Legendre is exact for these polynomial integrands at this order.
  const int nodes = std::max(96, jmax + 8);
  const bool with_v4 = field.v4_cm1 != 0.0;

  LevelDiagram diagram;
  for (int m = 0; m <= j_report; ++m) {
    for (int parity = 0; parity <= 1; ++parity) {
      std::vector<int> js;
      for (int j = m; j <= jmax; ++j)
        if (j % 2 == parity) js.push_back(j);
      if (js.empty()) continue;

      const int n = static_cast<int>(js.size());
      Eigen::MatrixXd h = Eigen::MatrixXd::Zero(n, n);
      for (int i = 0; i < n; ++i) {
        const int j = js[static_cast<std::size_t>(i)];
        h(i, i) = free_rotor_energy(j, iso.b_cm1, iso.d_cm1) +
                  field.v2_cm1 * angular::p2_diagonal(j, m);
        if (with_v4) h(i, i) += field.v4_cm1 * p4_diagonal(j, m, nodes);
        if (i + 1 < n) {
          double offd = field.v2_cm1 * angular::p2_coupling(j, m);
          if (with_v4)
            offd += field.v4_cm1 *
                    angular::legendre_matrix_element_quadrature(j + 2, j, m, 4, nodes);
          h(i, i + 1) = h(i + 1, i) = offd;
        }
        if (with_v4 && i + 2 < n) {
          const double offd4 =
              field.v4_cm1 * angular::legendre_matrix_element_quadrature(j + 4, j, m, 4, nodes);
          h(i, i + 2) = h(i + 2, i) = offd4;
        }
      }

      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(h);
      if (solver.info() != Eigen::Success)
        throw ConvergenceError("eigensolver failed on crystal-field block");

      // Dominant-J labeling, eigenvalues ascending; each basis J used once,
      // ties resolved toward the lower J by scanning rows in ascending order.
      std::vector<bool> used(js.size(), false);
      for (int k = 0; k < n; ++k) {
        int best = -1;
        double best_overlap = -1.0;
        for (int i = 0; i < n; ++i) {
          if (used[static_cast<std::size_t>(i)]) continue;
          const double overlap = solver.eigenvectors()(i, k) * solver.eigenvectors()(i, k);
          if (overlap > best_overlap + 1e-12) {
            best_overlap = overlap;
            best = i;
          }
        }
        used[static_cast<std::size_t>(best)] = true;
        const int j = js[static_cast<std::size_t>(best)];
        if (j <= j_report)
          diagram.entries.push_back(
              {j, m, solver.eigenvalues()(k), m == 0 ? 1 : 2});
      }
    }
  }
  std::sort(diagram.entries.begin(), diagram.entries.end(),
            [](const LevelEntry& a, const LevelEntry& b) {
              return a.j != b.j ? a.j < b.j : a.abs_mj < b.abs_mj;
            });
  return diagram;
}

}  // namespace

LevelDiagram level_diagram_perturbative(const Isotope& iso, const CrystalField& field,
                                        int jmax_report) {
  iso.validate();
  field.validate();
  if (jmax_report < 0) throw ValidationError("jmax_report must be >= 0");
  const int nodes = std::max(96, jmax_report + 8);
  const bool with_v4 = field.v4_cm1 != 0.0;

  LevelDiagram diagram;
  for (int j = 0; j <= jmax_report; ++j) {
    for (int m = 0; m <= j; ++m) {
      double e = free_rotor_energy(j, iso.b_cm1, iso.d_cm1) +
                 field.v2_cm1 * angular::p2_diagonal(j, m);
      if (with_v4) e += field.v4_cm1 * p4_diagonal(j, m, nodes);
      diagram.entries.push_back({j, m, e, m == 0 ? 1 : 2});
    }
  }
  return diagram;
}

LevelDiagram level_diagram_exact(const Isotope& iso, const CrystalField& field,
                                 int j_report) {
  iso.validate();
  field.validate();
  if (j_report < 0 || j_report > field.jmax - 4) j_report = field.jmax - 4;

  LevelDiagram diagram = diagonalize(iso, field, field.jmax, j_report);
  const LevelDiagram check = diagonalize(iso, field, field.jmax + 2, j_report);

  double worst = 0.0;
  const LevelEntry* worst_entry = nullptr;
  for (std::size_t i = 0; i < diagram.entries.size(); ++i) {
    const double delta =
        std::abs(diagram.entries[i].energy_cm1 - check.entries[i].energy_cm1);
    if (delta > worst) {
      worst = delta;
      worst_entry = &diagram.entries[i];
    }
  }
  if (worst > 1e-6) {
    std::ostringstream os;
    os << "level diagram not converged at jmax=" << field.jmax << ": level (J="
       << worst_entry->j << ", |mJ|=" << worst_entry->abs_mj << ") moves by " << worst
       << " cm^-1 under jmax+2; increase jmax";
    throw TruncationError(os.str());
  }
  return diagram;
}

}  // namespace rotspec
