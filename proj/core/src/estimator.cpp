#include "fshadow/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <json.hpp>

#include "fshadow/error.hpp"

namespace fshadow::estimator {

namespace {

int mod(int a, int n) { return ((a % n) + n) % n; }

// Basis positions whose indices all lie in the physical block [0, L).
std::vector<Eigen::Index> system_rows(const channel::CorrelatorBasis& basis, int L) {
  std::vector<Eigen::Index> rows;
  for (std::size_t s = 0; s < basis.size(); ++s) {
    const auto& c = basis.creation(s);
    const auto& a = basis.annihilation(s);
    // tuples are increasing, so the last entry is the largest
    if (c.back() < L && a.back() < L) rows.push_back(static_cast<Eigen::Index>(s));
  }
  return rows;
}

Eigen::MatrixXd row_block(const Eigen::MatrixXd& M, const std::vector<Eigen::Index>& rows) {
  Eigen::MatrixXd A(static_cast<Eigen::Index>(rows.size()), M.cols());
  for (std::size_t r = 0; r < rows.size(); ++r) A.row(static_cast<Eigen::Index>(r)) = M.row(rows[r]);
  return A;
}

// Preconditioned CG on A A^T y = b with A given through callbacks.
template <class Apply>
Eigen::VectorXd cg_solve(const Apply& gram, const Eigen::VectorXd& b, const Eigen::VectorXd& diag, int max_iter,
                         double rel_tol) {
  Eigen::VectorXd y = Eigen::VectorXd::Zero(b.size());
  Eigen::VectorXd r = b;
  Eigen::VectorXd z = r.cwiseQuotient(diag);
  Eigen::VectorXd p = z;
  double rz = r.dot(z);
  const double target = rel_tol * b.norm();
  for (int it = 0; it < max_iter && r.norm() > target; ++it) {
    const Eigen::VectorXd Ap = gram(p);
    const double pAp = p.dot(Ap);
    if (!(pAp > 0.0)) break;
    const double step = rz / pAp;
    y += step * p;
    r -= step * Ap;
    z = r.cwiseQuotient(diag);
    const double rz_next = r.dot(z);
    p = z + (rz_next / rz) * p;
    rz = rz_next;
  }
  return y;
}

struct TargetSlot {
  int sign = 0;
  std::size_t index = 0;
};

TargetSlot locate(const CorrelationTarget& t, const channel::CorrelatorBasis& basis) {
  const auto c = basis.canonical(t.creation, t.annihilation);
  return {c.sign, c.index};
}

double residual_against(const Eigen::VectorXcd& Mc, const std::vector<Eigen::Index>& rows, const TargetSlot& slot) {
  double worst = 0.0;
  for (Eigen::Index r : rows) {
    const cplx want = (slot.sign != 0 && static_cast<std::size_t>(r) == slot.index) ? cplx(slot.sign, 0.0) : cplx(0.0);
    worst = std::max(worst, std::abs(Mc(r) - want));
  }
  return worst;
}

EstimatorPlan empty_plan(const CorrelationTarget& target, int L, int L_tot, std::size_t d) {
  EstimatorPlan plan;
  plan.L = L;
  plan.L_tot = L_tot;
  plan.target = target;
  plan.coefficients = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(d));
  return plan;
}

}  // namespace

CorrelationTarget CorrelationTarget::two_point(int i, int j) { return {1, {i}, {j}}; }

CorrelationTarget CorrelationTarget::four_point(int i1, int i2, int j1, int j2) { return {2, {i1, i2}, {j1, j2}}; }

void CorrelationTarget::validate(int L) const {
  require(k == 1 || k == 2, "correlation target order must be 1 or 2");
  require(static_cast<int>(creation.size()) == k && static_cast<int>(annihilation.size()) == k,
          "correlation target index count must equal k");
  for (int v : creation) require(v >= 0 && v < L, "target index outside the physical modes");
  for (int v : annihilation) require(v >= 0 && v < L, "target index outside the physical modes");
}

std::string CorrelationTarget::to_string() const {
  std::ostringstream os;
  for (std::size_t r = 0; r < creation.size(); ++r) os << (r ? "," : "") << creation[r];
  os << ';';
  for (std::size_t r = 0; r < annihilation.size(); ++r) os << (r ? "," : "") << annihilation[r];
  return os.str();
}

circulant::ModeUnitary ShotRecord::unitary(int L_tot) const {
  if (alpha) return circulant::unitary_from_phases(circulant::nn_phases(*alpha, L_tot));
  require(static_cast<int>(phases.size()) == L_tot, "shot phase vector length differs from L_tot");
  return circulant::unitary_from_phases(circulant::PhaseVector{phases});
}

double EstimateReport::standard_error() const {
  return count > 0 ? std::sqrt(variance / static_cast<double>(count)) : 0.0;
}

double certificate_residual(const EstimatorPlan& plan, const channel::ChannelMatrix& M) {
  require(M.dimension() == static_cast<std::size_t>(plan.coefficients.size()), "plan and channel dimensions differ");
  const channel::CorrelatorBasis basis(plan.target.k, plan.L_tot);
  const Eigen::VectorXcd Mc = M.entries.cast<cplx>() * plan.coefficients;
  return residual_against(Mc, system_rows(basis, plan.L), locate(plan.target, basis));
}

EstimatorPlan plan_2pt(int i, int j, int L, int L_anc) {
  require(L >= 1 && L_anc >= 1, "plan_2pt needs L >= 1 and at least one ancilla");
  const int L_tot = L + L_anc;
  require(L_tot % 2 == 1, "L_tot must be odd");
  const auto target = CorrelationTarget::two_point(i, j);
  target.validate(L);
  const channel::CorrelatorBasis basis(1, L_tot);
  EstimatorPlan plan = empty_plan(target, L, L_tot, basis.size());
  const auto M = channel::m2_matrix(L_tot);
  if (i != j) {
    const double scale = L_tot;
    plan.coefficients(static_cast<Eigen::Index>(basis.index({i}, {j}))) += scale;
    plan.coefficients(static_cast<Eigen::Index>(basis.index({L_tot - 1}, {mod(j - i - 1, L_tot)}))) -= scale;
  } else {
    const auto Mp = channel::pseudo_inverse(M);
    plan.coefficients = Mp.entries.col(static_cast<Eigen::Index>(basis.index({i}, {i}))).cast<cplx>();
  }
  plan.certificate_residual = certificate_residual(plan, M);
  if (plan.certificate_residual > 1e-8)
    throw InfeasiblePlanError("2-point plan failed its certificate (" + std::to_string(plan.certificate_residual) + ")");
  return plan;
}

double system_conditioning(int L, const channel::ChannelMatrix& M4) {
  const channel::CorrelatorBasis basis(M4.k, M4.L);
  const Eigen::MatrixXd A = row_block(M4.entries, system_rows(basis, L));
  if (A.rows() > A.cols()) return 0.0;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(A);
  const auto& sv = svd.singularValues();
  return sv(0) > 0.0 ? sv(sv.size() - 1) / sv(0) : 0.0;
}

EstimatorPlan plan_4pt(const CorrelationTarget& target, int L, int L_anc, const channel::ChannelMatrix& M4,
                       const Plan4Options& opts) {
  require(target.k == 2, "plan_4pt needs a 4-point target");
  target.validate(L);
  const int L_tot = L + L_anc;
  require(L_tot % 2 == 1, "L_tot must be odd");
  require(M4.k == 2 && M4.L == L_tot, "M4 must be built for L_tot");
  const channel::CorrelatorBasis basis(2, L_tot);
  const auto slot = locate(target, basis);
  EstimatorPlan plan = empty_plan(target, L, L_tot, basis.size());
  if (slot.sign == 0) return plan;

  const auto rows = system_rows(basis, L);
  const Eigen::MatrixXd A = row_block(M4.entries, rows);
  const auto pos = std::find(rows.begin(), rows.end(), static_cast<Eigen::Index>(slot.index)) - rows.begin();
  Eigen::VectorXd e = Eigen::VectorXd::Zero(A.rows());
  e(pos) = slot.sign;

  Eigen::VectorXd x;
  if (opts.solve == SolveBackend::dense) {
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(A);
    cod.setThreshold(1e-10);
    if (cod.rank() < A.rows())
      throw InfeasiblePlanError("4-point system is rank-deficient at L_tot = " + std::to_string(L_tot) +
                                "; more ancillas are required");
    x = cod.solve(e);
  } else {
    const Eigen::VectorXd diag = A.rowwise().squaredNorm();
    auto gram = [&A](const Eigen::VectorXd& y) { return Eigen::VectorXd(A * (A.transpose() * y)); };
    x = A.transpose() * cg_solve(gram, e, diag, opts.cg_max_iterations, 1e-14);
  }

  const Eigen::VectorXcd xc = x.cast<cplx>();
  if (opts.projection == ProjectionBackend::spectral) {
    plan.coefficients = spectral_project(M4, xc);
  } else {
    const double T = opts.flow_time > 0.0 ? opts.flow_time : 50.0 * L_tot;
    plan.coefficients = ode_project(M4, xc, T);
  }
  plan.certificate_residual = certificate_residual(plan, M4);
  if (plan.certificate_residual > opts.tolerance)
    throw InfeasiblePlanError("4-point plan certificate residual " + std::to_string(plan.certificate_residual) +
                              " exceeds tolerance");
  return plan;
}

EstimatorPlan plan_4pt_matfree(const CorrelationTarget& target, int L, const channel::M4Operator& M4,
                               double tolerance, int max_iterations) {
  require(target.k == 2, "plan_4pt_matfree needs a 4-point target");
  target.validate(L);
  const int L_tot = M4.L();
  const auto& basis = M4.basis();
  const auto slot = locate(target, basis);
  EstimatorPlan plan = empty_plan(target, L, L_tot, basis.size());
  if (slot.sign == 0) return plan;

  const auto rows = system_rows(basis, L);
  const auto d = static_cast<Eigen::Index>(basis.size());
  const auto n = static_cast<Eigen::Index>(rows.size());
  Eigen::VectorXd diag(n);
  for (Eigen::Index r = 0; r < n; ++r) {
    double acc = 0.0;
    for (Eigen::Index h = 0; h < d; ++h) {
      const double v = M4.entry(static_cast<std::size_t>(rows[static_cast<std::size_t>(r)]), static_cast<std::size_t>(h));
      acc += v * v;
    }
    diag(r) = acc > 0.0 ? acc : 1.0;
  }
  auto lift = [&](const Eigen::VectorXd& y) {
    Eigen::VectorXd full = Eigen::VectorXd::Zero(d);
    for (Eigen::Index r = 0; r < n; ++r) full(rows[static_cast<std::size_t>(r)]) = y(r);
    return full;
  };
  auto restrict_rows = [&](const Eigen::VectorXd& full) {
    Eigen::VectorXd y(n);
    for (Eigen::Index r = 0; r < n; ++r) y(r) = full(rows[static_cast<std::size_t>(r)]);
    return y;
  };
  auto gram = [&](const Eigen::VectorXd& y) { return restrict_rows(M4.apply(M4.apply(lift(y)))); };
  const auto pos = std::find(rows.begin(), rows.end(), static_cast<Eigen::Index>(slot.index)) - rows.begin();
  Eigen::VectorXd e = Eigen::VectorXd::Zero(n);
  e(pos) = slot.sign;
  const Eigen::VectorXd x = M4.apply(lift(cg_solve(gram, e, diag, max_iterations, 1e-14)));
  plan.coefficients = x.cast<cplx>();

  const Eigen::VectorXd Mx = M4.apply(x);
  plan.certificate_residual = residual_against(Mx.cast<cplx>(), rows, slot);
  if (plan.certificate_residual > tolerance)
    throw InfeasiblePlanError("matrix-free 4-point plan did not reach the certificate tolerance");
  return plan;
}

int find_ancillas(int L, const std::function<const channel::ChannelMatrix&(int)>& m4_for, int max_ancillas) {
  require(L >= 2, "find_ancillas needs L >= 2");
  for (int anc = (L % 2 == 0) ? 1 : 2; anc <= max_ancillas; anc += 2)
    if (system_conditioning(L, m4_for(L + anc)) > 1e-8) return anc;
  throw InfeasiblePlanError("no feasible ancilla count up to " + std::to_string(max_ancillas));
}

Eigen::VectorXcd spectral_project(const channel::ChannelMatrix& M, const Eigen::VectorXcd& x0, double tol) {
  const auto& sp = M.spectrum();
  const double cut = tol * sp.values.cwiseAbs().maxCoeff();
  Eigen::VectorXcd out = Eigen::VectorXcd::Zero(x0.size());
  for (Eigen::Index c = 0; c < sp.values.size(); ++c) {
    if (sp.values(c) <= cut) continue;
    const Eigen::VectorXcd v = sp.vectors.col(c).cast<cplx>();
    out += v * v.dot(x0);
  }
  return out;
}

Eigen::VectorXcd ode_project(const channel::ChannelMatrix& M, const Eigen::VectorXcd& x0, double flow_time) {
  require(flow_time > 0.0, "flow time must be positive");
  const double lmax = M.spectrum().values.maxCoeff();
  require(lmax > 0.0, "channel has no positive eigenvalue");
  const double h = 0.5 / lmax;
  const Eigen::MatrixXcd Mc = M.entries.cast<cplx>();
  Eigen::VectorXcd x = Eigen::VectorXcd::Zero(x0.size());
  const auto steps = static_cast<long>(std::ceil(flow_time / h));
  for (long s = 0; s < steps; ++s) {
    const Eigen::VectorXcd dx = h * (Mc * (x0 - x));
    x += dx;
    if (dx.norm() <= 1e-10 && s > 0) break;
  }
  return x;
}

Eigen::MatrixXcd occupied_gram(const circulant::ModeUnitary& u, const fock::OccupationOutcome& n) {
  require(u.size() == n.size(), "outcome length differs from the unitary size");
  const Eigen::Index L = u.size();
  Eigen::MatrixXcd G = Eigen::MatrixXcd::Zero(L, L);
  for (Eigen::Index p = 0; p < L; ++p) {
    if (!n.bits[static_cast<std::size_t>(p)]) continue;
    G += u.entries.col(p).conjugate() * u.entries.col(p).transpose();
  }
  return G;
}

cplx wick_value(const Eigen::MatrixXcd& G, const std::vector<int>& creation, const std::vector<int>& annihilation) {
  if (creation.size() == 1) return G(creation[0], annihilation[0]);
  const int l1 = creation[0], l2 = creation[1], m1 = annihilation[0], m2 = annihilation[1];
  return G(l1, m2) * G(l2, m1) - G(l1, m1) * G(l2, m2);
}

cplx evaluate(const EstimatorPlan& plan, const Eigen::MatrixXcd& G) {
  const channel::CorrelatorBasis basis(plan.target.k, plan.L_tot);
  cplx acc = 0.0;
  for (Eigen::Index s = 0; s < plan.coefficients.size(); ++s) {
    const cplx c = plan.coefficients(s);
    if (c == cplx(0.0)) continue;
    const auto su = static_cast<std::size_t>(s);
    acc += c * wick_value(G, basis.creation(su), basis.annihilation(su));
  }
  return acc;
}

cplx single_shot_eval(const EstimatorPlan& plan, const circulant::ModeUnitary& u, const fock::OccupationOutcome& n) {
  require(u.size() == plan.L_tot, "unitary size differs from the plan's L_tot");
  return evaluate(plan, occupied_gram(u, n));
}

cplx pairwise_sum(const cplx* values, std::size_t n) {
  if (n == 0) return 0.0;
  if (n <= 8) {
    cplx acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += values[i];
    return acc;
  }
  const std::size_t half = n / 2;
  return pairwise_sum(values, half) + pairwise_sum(values + half, n - half);
}

EstimateReport aggregate_values(const std::vector<cplx>& values, double range_bound, double delta) {
  require(!values.empty(), "aggregate needs at least one shot");
  EstimateReport rep;
  rep.count = static_cast<std::int64_t>(values.size());
  rep.delta = delta;
  const double N = static_cast<double>(values.size());
  rep.mean = pairwise_sum(values.data(), values.size()) / N;
  if (values.size() > 1) {
    std::vector<cplx> sq(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
      const cplx d = values[i] - rep.mean;
      sq[i] = cplx(d.real() * d.real() + d.imag() * d.imag(), 0.0);
    }
    rep.variance = pairwise_sum(sq.data(), sq.size()).real() / (N - 1.0);
  }
  rep.hoeffding_epsilon = hoeffding_epsilon(range_bound, rep.count, delta);
  return rep;
}

EstimateReport aggregate(const std::vector<ShotRecord>& shots, const EstimatorPlan& plan, double delta) {
  require(!shots.empty(), "aggregate needs at least one shot");
  std::vector<cplx> values;
  values.reserve(shots.size());
  for (const auto& s : shots) {
    require(s.outcome.size() == plan.L_tot, "shot outcome length differs from L_tot");
    values.push_back(single_shot_eval(plan, s.unitary(plan.L_tot), s.outcome));
  }
  return aggregate_values(values, f_norm(plan), delta);
}

void save_plan(const std::filesystem::path& path, const EstimatorPlan& plan) {
  channel::CacheHeader h;
  h.kind = "plan";
  h.k = plan.target.k;
  h.L = plan.L_tot;
  h.d = static_cast<std::size_t>(plan.coefficients.size());
  nlohmann::json meta = {{"L", plan.L},
                         {"L_tot", plan.L_tot},
                         {"creation", plan.target.creation},
                         {"annihilation", plan.target.annihilation},
                         {"certificate_residual", plan.certificate_residual}};
  h.metadata = meta.dump();
  std::vector<double> payload;
  payload.reserve(2 * h.d);
  for (Eigen::Index s = 0; s < plan.coefficients.size(); ++s) {
    payload.push_back(plan.coefficients(s).real());
    payload.push_back(plan.coefficients(s).imag());
  }
  channel::write_container(path, h, payload);
}

EstimatorPlan load_plan(const std::filesystem::path& path) {
  auto [h, payload] = channel::read_container(path);
  if (h.kind != "plan") throw IoError(path.string() + " does not hold an estimator plan");
  if (payload.size() != 2 * h.d) throw IoError(path.string() + ": payload size mismatch");
  const auto meta = nlohmann::json::parse(h.metadata);
  EstimatorPlan plan;
  plan.L = meta.at("L").get<int>();
  plan.L_tot = meta.at("L_tot").get<int>();
  plan.target.k = h.k;
  plan.target.creation = meta.at("creation").get<std::vector<int>>();
  plan.target.annihilation = meta.at("annihilation").get<std::vector<int>>();
  plan.certificate_residual = meta.at("certificate_residual").get<double>();
  plan.coefficients.resize(static_cast<Eigen::Index>(h.d));
  for (std::size_t s = 0; s < h.d; ++s) plan.coefficients(static_cast<Eigen::Index>(s)) = {payload[2 * s], payload[2 * s + 1]};
  return plan;
}

}  // namespace fshadow::estimator
