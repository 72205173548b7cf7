#pragma once

/// Bulk topological invariants of Fermi projections on a torus.
///
/// The Chern number Ch(P) = 2πi 𝒯(P[∇₁P, ∇₂P]) is evaluated as a finite
/// trace. The index pairing Ind(P F P) with the Dirac phase
/// F = (X₁ + iX₂)/|X₁ + iX₂| is estimated from the small singular values of
/// P F P + (1 − P).

#include "bdglab/lattice.hpp"
#include "bdglab/models.hpp"

#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace bdg {

struct FermiProjection {
  BlockOperator P;
  BlockOperator H;       ///< the Hamiltonian P was taken from
  double mu_ref = 0.0;   ///< chemical potential absorbed in H
  double gap = 0.0;      ///< min |E| over the spectrum of H
  double loc_metric = 0.0;  ///< 𝒯(|∇P|²) = Σ_j 𝒯((∇_j P)^* ∇_j P)
};

/// Rejects eigenvalues in (−zero_tol, zero_tol) and lists them.
FermiProjection fermi_projection(const BlockOperator& H, double mu_ref = 0.0, double zero_tol = 1e-12);
FermiProjection fermi_projection(const BdGModel& m, double zero_tol = 1e-12);

/// 𝒯(|∇P|²) for any operator on a torus.
double localization_metric(const BlockOperator& P);

enum class ChernMethod { realspace_trace, fredholm_index };

std::string to_string(ChernMethod m);

struct ChernResult {
  double value = 0.0;
  ChernMethod method = ChernMethod::realspace_trace;
  double imaginary_residue = 0.0;  ///< realspace: |Im| of the computed trace
  double finite_size_error = std::numeric_limits<double>::quiet_NaN();
  int integer_snap = 0;
  double deviation = 0.0;          ///< |value − integer_snap|
  bool reliable = true;            ///< localization and conditioning flags
  double min_singular_gap = std::numeric_limits<double>::quiet_NaN();  ///< index: min |σ − ½| over vectors counted near the origin
  std::string note;
};

/// Default threshold on 𝒯(|∇P|²) above which results are marked unreliable.
inline constexpr double default_loc_threshold = 1e3;

/// 2πi 𝒯(P[∇₁P, ∇₂P]) for a projection on a torus (any fiber layout).
cplx chern_trace(const BlockOperator& P);

/// Same with the roles of the two derivations exchanged.
cplx chern_trace_swapped(const BlockOperator& P);

ChernResult chern_realspace(const FermiProjection& fp, double loc_threshold = default_loc_threshold);

/// Realspace Chern number with a finite-size estimate: the model is rebuilt
/// on a torus smaller by `shrink` sites in each direction and the difference
/// of the two values is reported.
ChernResult chern_realspace(const std::function<BdGModel(const LatticeSpec&)>& factory,
                            const LatticeSpec& spec, int shrink = 4,
                            double loc_threshold = default_loc_threshold);

struct IndexOptions {
  std::pair<double, double> origin_offset{0.5, 0.5};
  double threshold = 0.5;
  double band = 0.05;
  /// Singular values inside the band only count against reliability when
  /// their vectors carry at least this weight inside the counting region.
  double band_weight = 0.05;
  /// Radius of the region around the origin in which kernel vectors are
  /// counted; ≤ 0 selects min(n1, n2)/4.
  double mask_radius = 0.0;
};

/// Dirac phase F = (X₁ + iX₂)/|X₁ + iX₂| built from minimal-image coordinates
/// relative to the offset origin, as a diagonal on the full space.
Vector dirac_phase(const LatticeSpec& spec, std::pair<double, double> origin_offset);

ChernResult chern_index(const FermiProjection& fp, const IndexOptions& opts = {});

/// Energy-resolved Chern numbers Ch(χ(H ≤ E)) from one eigendecomposition.
/// Values are cached by occupation count and the class is safe to share.
class ChernProfile {
 public:
  explicit ChernProfile(BlockOperator H);

  const BlockOperator& hamiltonian() const { return H_; }
  const RealVector& energies() const { return H_.spectrum().values; }
  /// Number of eigenvalues ≤ E.
  Eigen::Index occupation(double E) const;
  double chern_at(double E) const;
  double chern_for_occupation(Eigen::Index count) const;
  double loc_metric_for_occupation(Eigen::Index count) const;

 private:
  struct Entry {
    double chern = 0.0;
    double loc = 0.0;
  };
  const Entry& entry(Eigen::Index count) const;

  BlockOperator H_;
  mutable std::mutex mutex_;
  mutable std::map<Eigen::Index, Entry> cache_;
};

struct RelationCheck {
  std::string name;   ///< "charge", "u1", "su2", "trs"
  double lhs = 0.0;   ///< Ch(P)
  double rhs = 0.0;   ///< value predicted from the reduced objects
  double deviation = 0.0;
  std::vector<double> parts;  ///< Ch of the reduced projections
  bool holds = false;
  std::string note;
};

struct ChernRelations {
  double chern = 0.0;
  std::vector<RelationCheck> checks;
  const RelationCheck* find(const std::string& name) const;
};

/// Evaluates every relation whose symmetry precondition holds.
ChernRelations chern_relations(const BdGModel& m, double tol = 1e-10);

int snap(double x);

}  // namespace bdg
