#include <algorithm>
#include <exception>
#include <mutex>
#include <thread>

#include "fshadow/error.hpp"
#include "fshadow/estimator.hpp"

namespace fshadow::estimator {

namespace {

template <class Fn>
void run_lanes(std::int64_t n, int threads, const Fn& body) {
  const int lanes = static_cast<int>(std::clamp<std::int64_t>(threads, 1, std::max<std::int64_t>(n, 1)));
  if (lanes == 1) {
    for (std::int64_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::vector<std::thread> pool;
  std::exception_ptr failure;
  std::mutex failure_mu;
  for (int lane = 0; lane < lanes; ++lane)
    pool.emplace_back([&, lane] {
      try {
        for (std::int64_t i = lane; i < n; i += lanes) body(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mu);
        if (!failure) failure = std::current_exception();
      }
    });
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

struct Term {
  cplx coef;
  int l1, l2, m1, m2;  // l2 = m2 = -1 for 2-point terms
};

std::vector<Term> compile(const EstimatorPlan& plan) {
  const channel::CorrelatorBasis basis(plan.target.k, plan.L_tot);
  std::vector<Term> terms;
  for (Eigen::Index s = 0; s < plan.coefficients.size(); ++s) {
    const cplx c = plan.coefficients(s);
    if (c == cplx(0.0)) continue;
    const auto& cr = basis.creation(static_cast<std::size_t>(s));
    const auto& an = basis.annihilation(static_cast<std::size_t>(s));
    if (plan.target.k == 1)
      terms.push_back({c, cr[0], -1, an[0], -1});
    else
      terms.push_back({c, cr[0], cr[1], an[0], an[1]});
  }
  return terms;
}

cplx evaluate_terms(const std::vector<Term>& terms, const Eigen::MatrixXcd& G) {
  cplx acc = 0.0;
  for (const auto& t : terms) {
    if (t.l2 < 0)
      acc += t.coef * G(t.l1, t.m1);
    else
      acc += t.coef * (G(t.l1, t.m2) * G(t.l2, t.m1) - G(t.l1, t.m1) * G(t.l2, t.m2));
  }
  return acc;
}

}  // namespace

std::uint64_t shot_seed(std::uint64_t base, std::int64_t shot_id) {
  std::uint64_t z = base ^ static_cast<std::uint64_t>(shot_id);
  z += 0x9e3779b97f4a7c15ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

std::vector<ShotRecord> generate_shots(const fock::StateVector& input, const circulant::EnsembleSpec& spec,
                                       std::int64_t count, std::uint64_t seed, int threads, std::int64_t first_id) {
  require(count >= 1, "shot count must be at least 1");
  require(spec.L == input.modes, "ensemble size must equal the number of modes of the input state");
  spec.validate();
  const fock::QuenchSampler sampler(input);
  std::vector<ShotRecord> shots(static_cast<std::size_t>(count));
  run_lanes(count, threads, [&](std::int64_t i) {
    ShotRecord& rec = shots[static_cast<std::size_t>(i)];
    rec.shot_id = first_id + i;
    rec.seed = shot_seed(seed, rec.shot_id);
    std::mt19937_64 rng(rec.seed);
    auto draw = circulant::sample_ensemble(spec, rng);
    rec.alpha = draw.alpha;
    if (!rec.alpha) rec.phases = draw.phases.phases;
    rec.outcome = sampler.sample(draw.phases, rng);
  });
  return shots;
}

std::vector<std::vector<cplx>> evaluate_shots(const std::vector<EstimatorPlan>& plans,
                                              const std::vector<ShotRecord>& shots, int threads) {
  std::vector<std::vector<cplx>> out(plans.size(), std::vector<cplx>(shots.size()));
  if (plans.empty()) return out;
  const int L_tot = plans.front().L_tot;
  std::vector<std::vector<Term>> compiled;
  for (const auto& p : plans) {
    require(p.L_tot == L_tot, "plans must share L_tot");
    compiled.push_back(compile(p));
  }
  run_lanes(static_cast<std::int64_t>(shots.size()), threads, [&](std::int64_t i) {
    const auto& s = shots[static_cast<std::size_t>(i)];
    require(s.outcome.size() == L_tot, "shot outcome length differs from L_tot");
    const Eigen::MatrixXcd G = occupied_gram(s.unitary(L_tot), s.outcome);
    for (std::size_t p = 0; p < plans.size(); ++p) out[p][static_cast<std::size_t>(i)] = evaluate_terms(compiled[p], G);
  });
  return out;
}

}  // namespace fshadow::estimator
