#include "vecstab/sdp.h"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <map>
#include <ostream>
#include <stdexcept>
#include <tuple>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

namespace vecstab {

int SdpProblem::total_dimension() const {
  int n = 0;
  for (int s : block_sizes) n += s;
  return n;
}

namespace {

void ValidateEntries(const std::vector<SymEntry>& entries, const std::vector<int>& sizes,
                     const std::string& what) {
  for (const auto& e : entries) {
    if (e.block < 0 || e.block >= static_cast<int>(sizes.size())) {
      throw std::invalid_argument(what + ": block index " + std::to_string(e.block) +
                                  " out of range");
    }
    const int n = sizes[e.block];
    if (e.row < 0 || e.col < 0 || e.row >= n || e.col >= n) {
      throw std::invalid_argument(what + ": entry outside block " + std::to_string(e.block));
    }
    if (e.row > e.col) {
      throw std::invalid_argument(what + ": entries must be upper triangular (row <= col)");
    }
    if (!std::isfinite(e.value)) throw std::invalid_argument(what + ": non-finite value");
  }
}

void AddEntry(BlockMatrix& m, const SymEntry& e, double scale) {
  m[e.block](e.row, e.col) += scale * e.value;
  if (e.row != e.col) m[e.block](e.col, e.row) += scale * e.value;
}

BlockMatrix ZeroBlocks(const std::vector<int>& sizes) {
  BlockMatrix m;
  m.reserve(sizes.size());
  for (int s : sizes) m.push_back(Matrix::Zero(s, s));
  return m;
}

BlockMatrix IdentityBlocks(const std::vector<int>& sizes, double scale) {
  BlockMatrix m;
  m.reserve(sizes.size());
  for (int s : sizes) m.push_back(scale * Matrix::Identity(s, s));
  return m;
}

double Dot(const BlockMatrix& a, const BlockMatrix& b) {
  double sum = 0.0;
  for (size_t k = 0; k < a.size(); ++k) sum += a[k].cwiseProduct(b[k]).sum();
  return sum;
}

double FrobeniusNorm(const BlockMatrix& a) { return std::sqrt(Dot(a, a)); }

void Symmetrize(Matrix& m) { m = 0.5 * (m + m.transpose()).eval(); }

}  // namespace

void SdpProblem::Validate() const {
  for (int s : block_sizes) {
    if (s <= 0) throw std::invalid_argument("SdpProblem: block sizes must be positive");
  }
  if (block_sizes.empty()) throw std::invalid_argument("SdpProblem: no blocks");
  if (objective.size() != constraint_matrices.size()) {
    throw std::invalid_argument("SdpProblem: objective length differs from variable count");
  }
  for (size_t k = 0; k < constraint_matrices.size(); ++k) {
    ValidateEntries(constraint_matrices[k], block_sizes, "A_" + std::to_string(k));
  }
  ValidateEntries(offset, block_sizes, "C");
}

BlockMatrix SdpProblem::Offset() const {
  BlockMatrix c = ZeroBlocks(block_sizes);
  for (const auto& e : offset) AddEntry(c, e, 1.0);
  return c;
}

BlockMatrix SdpProblem::Slack(std::span<const double> x) const {
  if (static_cast<int>(x.size()) != num_vars()) {
    throw std::invalid_argument("SdpProblem::Slack: wrong number of variables");
  }
  BlockMatrix s = ZeroBlocks(block_sizes);
  for (const auto& e : offset) AddEntry(s, e, -1.0);
  for (int k = 0; k < num_vars(); ++k) {
    if (x[k] == 0.0) continue;
    for (const auto& e : constraint_matrices[k]) AddEntry(s, e, x[k]);
  }
  return s;
}

void SdpProblem::WriteSparseText(std::ostream& os) const {
  const auto old_precision = os.precision(17);
  os << num_vars() << " " << block_sizes.size() << "\n";
  for (size_t b = 0; b < block_sizes.size(); ++b) os << (b ? " " : "") << block_sizes[b];
  os << "\n";
  for (size_t k = 0; k < objective.size(); ++k) os << (k ? " " : "") << objective[k];
  os << "\n";
  auto dump = [&](int var, const std::vector<SymEntry>& entries) {
    for (const auto& e : entries) {
      os << var << " " << e.block + 1 << " " << e.row + 1 << " " << e.col + 1 << " " << e.value
         << "\n";
    }
  };
  dump(0, offset);
  for (int k = 0; k < num_vars(); ++k) dump(k + 1, constraint_matrices[k]);
  os.precision(old_precision);
}

std::string ToString(SdpStatus status) {
  switch (status) {
    case SdpStatus::kOptimal:
      return "optimal";
    case SdpStatus::kInfeasible:
      return "infeasible";
    case SdpStatus::kUnbounded:
      return "unbounded";
    case SdpStatus::kStalled:
      return "stalled";
  }
  return "unknown";
}

SdpSettings DefaultSdpSettings() {
  SdpSettings settings;
  if (const char* env = std::getenv("VECSTAB_SDP_TOL")) {
    char* end = nullptr;
    const double tol = std::strtod(env, &end);
    if (end != env && tol > 0.0 && std::isfinite(tol)) settings.tol = tol;
  }
  return settings;
}

double MinEigenvalue(const BlockMatrix& m) {
  double lowest = std::numeric_limits<double>::infinity();
  for (const auto& block : m) {
    if (block.rows() == 1) {
      lowest = std::min(lowest, block(0, 0));
      continue;
    }
    Eigen::SelfAdjointEigenSolver<Matrix> eig(block, Eigen::EigenvaluesOnly);
    lowest = std::min(lowest, eig.eigenvalues()(0));
  }
  return lowest;
}

namespace {

struct LocalEntry {
  int row;
  int col;
  double value;
};

// Merged, block-grouped copy of the problem data used by the iterations.
class Model {
 public:
  explicit Model(const SdpProblem& problem)
      : sizes_(problem.block_sizes), num_vars_(problem.num_vars()) {
    by_var_.resize(num_vars_);
    touch_.resize(sizes_.size());
    a_norm_.assign(num_vars_, 0.0);
    for (int k = 0; k < num_vars_; ++k) {
      std::map<std::tuple<int, int, int>, double> merged;
      for (const auto& e : problem.constraint_matrices[k]) {
        merged[{e.block, e.row, e.col}] += e.value;
      }
      double norm2 = 0.0;
      for (const auto& [key, v] : merged) {
        if (v == 0.0) continue;
        const auto [b, i, j] = key;
        if (by_var_[k].empty() || by_var_[k].back().first != b) {
          by_var_[k].emplace_back(b, std::vector<LocalEntry>());
        }
        by_var_[k].back().second.push_back({i, j, v});
        norm2 += (i == j ? 1.0 : 2.0) * v * v;
      }
      a_norm_[k] = std::sqrt(norm2);
      for (const auto& [b, entries] : by_var_[k]) touch_[b].emplace_back(k, &entries);
    }
    c_ = Eigen::Map<const Vector>(problem.objective.data(), num_vars_);
    offset_ = problem.Offset();
    n_total_ = problem.total_dimension();
  }

  int num_vars() const { return num_vars_; }
  int n_total() const { return n_total_; }
  const std::vector<int>& sizes() const { return sizes_; }
  const Vector& c() const { return c_; }
  const BlockMatrix& offset() const { return offset_; }
  double a_norm(int k) const { return a_norm_[k]; }

  // out = sum_k x_k A_k
  BlockMatrix Apply(const Vector& x) const {
    BlockMatrix out = ZeroBlocks(sizes_);
    for (int k = 0; k < num_vars_; ++k) {
      const double xk = x(k);
      if (xk == 0.0) continue;
      for (const auto& [b, entries] : by_var_[k]) {
        for (const auto& e : entries) {
          out[b](e.row, e.col) += xk * e.value;
          if (e.row != e.col) out[b](e.col, e.row) += xk * e.value;
        }
      }
    }
    return out;
  }

  // out_k = <A_k, W>; W need not be symmetric.
  Vector Adjoint(const BlockMatrix& w) const {
    Vector out = Vector::Zero(num_vars_);
    for (int k = 0; k < num_vars_; ++k) {
      double sum = 0.0;
      for (const auto& [b, entries] : by_var_[k]) {
        const Matrix& wb = w[b];
        for (const auto& e : entries) {
          sum += e.row == e.col ? e.value * wb(e.row, e.row)
                                : e.value * (wb(e.row, e.col) + wb(e.col, e.row));
        }
      }
      out(k) = sum;
    }
    return out;
  }

  // M_kl = <A_k, S^{-1} A_l Z>.
  Matrix Schur(const BlockMatrix& sinv, const BlockMatrix& z) const {
    Matrix m = Matrix::Zero(num_vars_, num_vars_);
    for (size_t b = 0; b < sizes_.size(); ++b) {
      const auto& list = touch_[b];
      if (list.empty()) continue;
      if (sizes_[b] == 1) {
        const double s = sinv[b](0, 0) * z[b](0, 0);
        for (size_t p = 0; p < list.size(); ++p) {
          const double vp = (*list[p].second)[0].value;
          for (size_t q = p; q < list.size(); ++q) {
            const double t = s * vp * (*list[q].second)[0].value;
            m(list[p].first, list[q].first) += t;
            if (p != q) m(list[q].first, list[p].first) += t;
          }
        }
        continue;
      }
      const Matrix& si = sinv[b];
      const Matrix& zb = z[b];
      Matrix g(sizes_[b], sizes_[b]);
      for (size_t p = 0; p < list.size(); ++p) {
        g.setZero();
        for (const auto& e : *list[p].second) {
          g.noalias() += e.value * si.col(e.row) * zb.row(e.col);
          if (e.row != e.col) g.noalias() += e.value * si.col(e.col) * zb.row(e.row);
        }
        const int k = list[p].first;
        for (size_t q = p; q < list.size(); ++q) {
          double t = 0.0;
          for (const auto& f : *list[q].second) {
            t += f.row == f.col ? f.value * g(f.row, f.row)
                                : f.value * (g(f.row, f.col) + g(f.col, f.row));
          }
          const int l = list[q].first;
          m(k, l) += t;
          if (k != l) m(l, k) += t;
        }
      }
    }
    return m;
  }

 private:
  std::vector<int> sizes_;
  int num_vars_;
  int n_total_ = 0;
  std::vector<std::vector<std::pair<int, std::vector<LocalEntry>>>> by_var_;
  std::vector<std::vector<std::pair<int, const std::vector<LocalEntry>*>>> touch_;
  std::vector<double> a_norm_;
  Vector c_;
  BlockMatrix offset_;
};

// Largest alpha with X + alpha * D PSD, given the Cholesky factors of X.
double MaxStep(const std::vector<Eigen::LLT<Matrix>>& chol, const BlockMatrix& x,
               const BlockMatrix& d) {
  double alpha = std::numeric_limits<double>::infinity();
  for (size_t b = 0; b < d.size(); ++b) {
    double lowest;
    if (d[b].rows() == 1) {
      lowest = d[b](0, 0) / x[b](0, 0);
    } else {
      Matrix t = chol[b].matrixL().solve(d[b]);
      Matrix w = chol[b].matrixL().solve(t.transpose());
      Symmetrize(w);
      Eigen::SelfAdjointEigenSolver<Matrix> eig(w, Eigen::EigenvaluesOnly);
      lowest = eig.eigenvalues()(0);
    }
    if (lowest < 0.0) alpha = std::min(alpha, -1.0 / lowest);
  }
  return alpha;
}

bool FactorAll(const BlockMatrix& x, std::vector<Eigen::LLT<Matrix>>& chol) {
  chol.resize(x.size());
  for (size_t b = 0; b < x.size(); ++b) {
    chol[b].compute(x[b]);
    if (chol[b].info() != Eigen::Success) return false;
  }
  return true;
}

enum class RawExit { kConverged, kZDiverged, kXDiverged, kStalled, kIterationLimit, kNumerical };

struct RawResult {
  RawExit exit = RawExit::kIterationLimit;
  Vector x;
  BlockMatrix s;
  BlockMatrix z;
  double gap = 0.0;
  double pres = 0.0;
  double dres = 0.0;
  double pobj = 0.0;
  double dobj = 0.0;
  int iterations = 0;
  std::vector<SdpIterate> history;
};

RawResult RunInteriorPoint(const Model& model, const SdpSettings& settings) {
  const int m = model.num_vars();
  const int n = model.n_total();
  const auto& sizes = model.sizes();
  const BlockMatrix& c_mat = model.offset();
  const Vector& c = model.c();
  const double c_mat_norm = FrobeniusNorm(c_mat);
  const double c_norm = c.norm();

  // Identity-scaled cold start.
  double max_a = 0.0;
  double ratio = 0.0;
  for (int k = 0; k < m; ++k) {
    max_a = std::max(max_a, model.a_norm(k));
    ratio = std::max(ratio, (1.0 + std::abs(c(k))) / (1.0 + model.a_norm(k)));
  }
  const double z_scale = 10.0 * n * ratio;
  const double s_scale = 10.0 * (1.0 + std::max(max_a, c_mat_norm)) / std::sqrt(double(n));

  RawResult r;
  r.x = Vector::Zero(m);
  r.s = IdentityBlocks(sizes, s_scale);
  r.z = IdentityBlocks(sizes, z_scale);

  std::vector<Eigen::LLT<Matrix>> chol_s, chol_z;
  BlockMatrix sinv(sizes.size());

  // Best iterate by the worst of the three termination measures; returned
  // when the iteration ends close to, but not at, the target accuracy.
  RawResult best;
  double best_merit = std::numeric_limits<double>::infinity();
  const double near_tol = 10.0 * settings.tol;
  // Primal-feasible iterate with the smallest gap whose dual residual is
  // only loosely small. The primal point alone carries the certificate, so
  // it is accepted when the dual side is lost to ill-conditioning.
  RawResult fallback;
  double fallback_gap = std::numeric_limits<double>::infinity();
  const double loose_dual = std::sqrt(settings.tol);
  auto snapshot = [&](RawResult& dst) {
    dst.x = r.x;
    dst.s = r.s;
    dst.z = r.z;
    dst.gap = r.gap;
    dst.pres = r.pres;
    dst.dres = r.dres;
    dst.pobj = r.pobj;
    dst.dobj = r.dobj;
  };
  auto settle = [&](RawExit exit) {
    r.exit = exit;
    RawResult* pick = nullptr;
    if (best_merit <= near_tol) {
      pick = &best;
    } else if (fallback_gap <= near_tol) {
      pick = &fallback;
    }
    if (pick) {
      std::vector<SdpIterate> history = std::move(r.history);
      const int iterations = r.iterations;
      r = std::move(*pick);
      r.history = std::move(history);
      r.iterations = iterations;
      r.exit = RawExit::kConverged;
    }
    return r;
  };

  for (int iter = 0; iter <= settings.max_iter; ++iter) {
    r.iterations = iter;
    BlockMatrix rp = model.Apply(r.x);
    for (size_t b = 0; b < sizes.size(); ++b) rp[b] -= c_mat[b] + r.s[b];
    const Vector rd = c - model.Adjoint(r.z);
    r.pobj = c.dot(r.x);
    r.dobj = Dot(c_mat, r.z);
    const double mu = Dot(r.s, r.z) / n;
    const double scale = 1.0 + std::abs(r.pobj) + std::abs(r.dobj);
    r.pres = FrobeniusNorm(rp) / (1.0 + c_mat_norm);
    r.dres = rd.norm() / (1.0 + c_norm);
    r.gap = std::max(std::abs(r.pobj - r.dobj), mu * n) / scale;
    r.history.push_back({r.pobj, r.dobj, r.pres, r.dres, mu});

    if (r.gap <= settings.tol && r.pres <= settings.tol && r.dres <= settings.tol) {
      r.exit = RawExit::kConverged;
      return r;
    }
    const double merit = std::max({r.gap, r.pres, r.dres});
    if (merit < best_merit) {
      best_merit = merit;
      snapshot(best);
    } else if (best_merit <= near_tol && merit > 100.0 * best_merit) {
      // Ill-conditioning has started to undo progress.
      return settle(RawExit::kStalled);
    }
    if (r.pres <= settings.tol && r.dres <= loose_dual && r.gap < fallback_gap) {
      fallback_gap = r.gap;
      snapshot(fallback);
    }
    if (FrobeniusNorm(r.z) > settings.divergence_limit * (1.0 + c_norm)) {
      return settle(RawExit::kZDiverged);
    }
    if (r.x.lpNorm<Eigen::Infinity>() > settings.divergence_limit * (1.0 + c_mat_norm)) {
      return settle(RawExit::kXDiverged);
    }
    if (iter == settings.max_iter) break;

    if (!FactorAll(r.s, chol_s) || !FactorAll(r.z, chol_z)) return settle(RawExit::kNumerical);
    for (size_t b = 0; b < sizes.size(); ++b) {
      sinv[b] = chol_s[b].solve(Matrix::Identity(sizes[b], sizes[b]));
      Symmetrize(sinv[b]);
    }

    const Matrix schur_exact = model.Schur(sinv, r.z);
    Matrix schur = schur_exact;
    Eigen::LLT<Matrix> schur_chol(schur);
    double reg = 1e-14 * (1.0 + schur.diagonal().cwiseAbs().maxCoeff());
    for (int attempt = 0; schur_chol.info() != Eigen::Success && attempt < 8; ++attempt) {
      schur.diagonal().array() += reg;
      schur_chol.compute(schur);
      reg *= 100.0;
    }
    if (schur_chol.info() != Eigen::Success) return settle(RawExit::kNumerical);

    BlockMatrix w(sizes.size());
    for (size_t b = 0; b < sizes.size(); ++b) w[b] = sinv[b] * rp[b] * r.z[b];
    const Vector base = -c - model.Adjoint(w);
    const Vector sinv_trace = model.Adjoint(sinv);

    auto directions = [&](const Vector& rhs, double target, const BlockMatrix* second_order,
                          Vector& dx, BlockMatrix& ds, BlockMatrix& dz) {
      dx = schur_chol.solve(rhs);
      dx += schur_chol.solve(rhs - schur_exact * dx);  // one refinement step
      ds = model.Apply(dx);
      dz.resize(sizes.size());
      for (size_t b = 0; b < sizes.size(); ++b) {
        ds[b] += rp[b];
        dz[b] = -r.z[b] - sinv[b] * ds[b] * r.z[b];
        if (target != 0.0) dz[b] += target * sinv[b];
        if (second_order) dz[b] -= sinv[b] * (*second_order)[b];
        Symmetrize(dz[b]);
      }
    };

    // Predictor (affine scaling).
    Vector dx;
    BlockMatrix ds, dz;
    directions(base, 0.0, nullptr, dx, ds, dz);
    const double ap_aff = std::min(1.0, MaxStep(chol_s, r.s, ds));
    const double ad_aff = std::min(1.0, MaxStep(chol_z, r.z, dz));
    double mu_aff = 0.0;
    for (size_t b = 0; b < sizes.size(); ++b) {
      mu_aff += (r.s[b] + ap_aff * ds[b]).cwiseProduct(r.z[b] + ad_aff * dz[b]).sum();
    }
    mu_aff /= n;
    const double sigma = std::clamp(std::pow(std::max(mu_aff, 0.0) / mu, 3.0), 0.0, 1.0);

    // Corrector with the second-order term.
    BlockMatrix h(sizes.size());
    for (size_t b = 0; b < sizes.size(); ++b) h[b] = ds[b] * dz[b];
    BlockMatrix sinv_h(sizes.size());
    for (size_t b = 0; b < sizes.size(); ++b) sinv_h[b] = sinv[b] * h[b];
    const Vector rhs = base + sigma * mu * sinv_trace - model.Adjoint(sinv_h);
    directions(rhs, sigma * mu, &h, dx, ds, dz);

    const double ap = std::min(1.0, settings.step_fraction * MaxStep(chol_s, r.s, ds));
    const double ad = std::min(1.0, settings.step_fraction * MaxStep(chol_z, r.z, dz));
    if (ap < settings.min_step && ad < settings.min_step) return settle(RawExit::kStalled);
    r.x += ap * dx;
    for (size_t b = 0; b < sizes.size(); ++b) {
      r.s[b] += ap * ds[b];
      r.z[b] += ad * dz[b];
      Symmetrize(r.s[b]);
      Symmetrize(r.z[b]);
    }
  }
  return settle(RawExit::kIterationLimit);
}

SdpProblem MarginProblem(const SdpProblem& problem, double cap) {
  SdpProblem aux = problem;
  const int shift_var = aux.num_vars();
  std::vector<SymEntry> shift;
  for (size_t b = 0; b < aux.block_sizes.size(); ++b) {
    for (int i = 0; i < aux.block_sizes[b]; ++i) shift.push_back({static_cast<int>(b), i, i, -1.0});
  }
  const int cap_block = static_cast<int>(aux.block_sizes.size());
  aux.block_sizes.push_back(1);
  shift.push_back({cap_block, 0, 0, -1.0});
  aux.offset.push_back({cap_block, 0, 0, -cap});
  aux.constraint_matrices.push_back(std::move(shift));
  aux.objective.assign(aux.num_vars(), 0.0);
  aux.objective[shift_var] = -1.0;
  return aux;
}

MarginResult SolveMargin(const SdpProblem& problem, const SdpSettings& settings, double cap) {
  const SdpProblem aux = MarginProblem(problem, cap);
  const Model model(aux);
  RawResult raw = RunInteriorPoint(model, settings);
  MarginResult out;
  const int m = problem.num_vars();
  out.margin = raw.x(m);
  out.x = raw.x.head(m);
  out.dual.assign(raw.z.begin(), raw.z.end() - 1);
  const bool near = raw.gap <= 10 * settings.tol && raw.pres <= 10 * settings.tol &&
                    raw.dres <= 10 * settings.tol;
  out.status = (raw.exit == RawExit::kConverged || near) ? SdpStatus::kOptimal
                                                         : SdpStatus::kStalled;
  return out;
}

}  // namespace

MarginResult StrictFeasibilityMargin(const SdpProblem& problem, const SdpSettings& settings,
                                     double cap) {
  problem.Validate();
  return SolveMargin(problem, settings, cap);
}

SdpSolution SolveSdp(const SdpProblem& problem, const SdpSettings& settings) {
  problem.Validate();
  if (problem.num_vars() == 0) {
    throw std::invalid_argument("SolveSdp: problem has no decision variables");
  }
  const Model model(problem);
  RawResult raw = RunInteriorPoint(model, settings);

  SdpSolution sol;
  sol.x = raw.x;
  sol.objective_value = raw.pobj;
  sol.dual_objective = raw.dobj;
  sol.slack = problem.Slack(std::span<const double>(raw.x.data(), raw.x.size()));
  sol.dual = raw.z;
  sol.gap = raw.gap;
  sol.primal_residual = raw.pres;
  sol.dual_residual = raw.dres;
  sol.iterations = raw.iterations;
  sol.history = std::move(raw.history);

  const double loose = 10 * settings.tol;
  if (raw.exit == RawExit::kConverged ||
      (raw.gap <= loose && raw.pres <= loose && raw.dres <= loose)) {
    sol.status = SdpStatus::kOptimal;
    return sol;
  }

  // No convergence: decide between infeasible, unbounded and stalled.
  const MarginResult margin = SolveMargin(problem, settings, 1.0);
  if (margin.status == SdpStatus::kOptimal && margin.margin < -loose) {
    sol.status = SdpStatus::kInfeasible;
    double trace = 0.0;
    for (const auto& block : margin.dual) trace += block.trace();
    sol.infeasibility_certificate = margin.dual;
    if (trace > 0.0) {
      for (auto& block : sol.infeasibility_certificate) block /= trace;
    }
    return sol;
  }
  if (raw.exit == RawExit::kXDiverged && raw.pobj < 0.0) {
    sol.status = SdpStatus::kUnbounded;
    sol.unbounded_ray = raw.x / raw.x.norm();
    return sol;
  }
  sol.status = SdpStatus::kStalled;
  return sol;
}

}  // namespace vecstab
