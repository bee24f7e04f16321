#include "fshadow/cli/config.hpp"

#include <cstdlib>
#include <fstream>
#include <random>

#include "fshadow/channel.hpp"
#include "fshadow/error.hpp"

namespace fshadow::cli {

namespace {

const char* state_kind_name(StateKind k) {
  switch (k) {
    case StateKind::cdw_hubbard: return "cdw_hubbard";
    case StateKind::fock: return "fock";
    case StateKind::amplitudes: return "amplitudes";
  }
  return "unknown";
}

StateKind state_kind_from(const std::string& s) {
  if (s == "cdw_hubbard") return StateKind::cdw_hubbard;
  if (s == "fock") return StateKind::fock;
  if (s == "amplitudes") return StateKind::amplitudes;
  throw ValidationError("unknown state kind '" + s + "'");
}

json ensemble_json(const circulant::EnsembleSpec& e) {
  json j = {{"kind", circulant::to_string(e.kind)}};
  if (e.kind == circulant::EnsembleKind::nn_uniform) j["alpha_max"] = e.alpha_max;
  if (e.kind == circulant::EnsembleKind::nn_normal) {
    j["mu"] = e.mu;
    j["sigma"] = e.sigma;
  }
  return j;
}

json target_json(const estimator::CorrelationTarget& t) {
  return {{"creation", t.creation}, {"annihilation", t.annihilation}};
}

template <class T>
T get_or(const json& j, const char* key, T fallback) {
  return j.contains(key) ? j.at(key).get<T>() : fallback;
}

}  // namespace

void ExperimentConfig::validate() const {
  require(L >= 1, "L must be at least 1");
  require(L_anc >= 1, "L_anc must be at least 1");
  require(L_tot() % 2 == 1, "L_tot = L + L_anc must be odd");
  require(L_tot() <= fock::kMaxModes, "L_tot exceeds the simulator limit");
  require(N >= 1, "N must be at least 1");
  require(threads >= 1, "threads must be at least 1");
  require(ensemble.L == L_tot(), "ensemble size must equal L_tot");
  ensemble.validate();
  require(!targets.empty(), "at least one target is required");
  for (const auto& t : targets) t.validate(L);
  if (state.kind == StateKind::cdw_hubbard) {
    require(state.g_min <= state.g_max, "g range must be ordered");
  } else if (state.kind == StateKind::fock) {
    require(static_cast<int>(state.occupation.size()) == L, "fock occupation string must have L characters");
  } else {
    require(!state.amplitude_file.empty(), "amplitude file path is required");
  }
}

json ExperimentConfig::to_json() const {
  json s = {{"kind", state_kind_name(state.kind)}};
  if (state.kind == StateKind::cdw_hubbard) {
    s["t0"] = state.t0;
    s["g_range"] = {state.g_min, state.g_max};
    s["field_seed"] = state.field_seed;
  } else if (state.kind == StateKind::fock) {
    s["occupation"] = state.occupation;
  } else {
    s["path"] = state.amplitude_file.string();
  }
  json t = json::array();
  for (const auto& x : targets) t.push_back(target_json(x));
  json out = {{"shots", output.shots.string()},
              {"report", output.report.string()},
              {"csv_prefix", output.csv_prefix.string()}};
  if (!output.svg_dir.empty()) out["svg_dir"] = output.svg_dir.string();
  return {{"L", L},         {"L_anc", L_anc}, {"ensemble", ensemble_json(ensemble)},
          {"N", N},         {"seed", seed},   {"threads", threads},
          {"state", s},     {"targets", t},   {"output", out}};
}

ExperimentConfig ExperimentConfig::from_json(const json& j) {
  ExperimentConfig c;
  try {
    c.L = get_or(j, "L", c.L);
    c.L_anc = get_or(j, "L_anc", c.L_anc);
    c.N = get_or<std::int64_t>(j, "N", c.N);
    c.seed = get_or<std::uint64_t>(j, "seed", c.seed);
    c.threads = get_or(j, "threads", c.threads);

    const json e = get_or<json>(j, "ensemble", json::object());
    const auto kind = circulant::ensemble_kind_from_string(get_or<std::string>(e, "kind", "nn_uniform"));
    c.ensemble = circulant::EnsembleSpec{kind, c.L_tot(), get_or(e, "alpha_max", 120.0), get_or(e, "mu", 0.0),
                                         get_or(e, "sigma", 0.0)};

    const json s = get_or<json>(j, "state", json::object());
    c.state.kind = state_kind_from(get_or<std::string>(s, "kind", "cdw_hubbard"));
    c.state.t0 = get_or(s, "t0", c.state.t0);
    if (s.contains("g_range")) {
      c.state.g_min = s.at("g_range").at(0).get<double>();
      c.state.g_max = s.at("g_range").at(1).get<double>();
    }
    c.state.field_seed = get_or<std::uint64_t>(s, "field_seed", c.state.field_seed);
    c.state.occupation = get_or<std::string>(s, "occupation", "");
    c.state.amplitude_file = get_or<std::string>(s, "path", "");

    c.targets = expand_targets(get_or<json>(j, "targets", json::array({"all_2pt"})), c.L);

    const json o = get_or<json>(j, "output", json::object());
    c.output.shots = get_or<std::string>(o, "shots", c.output.shots.string());
    c.output.report = get_or<std::string>(o, "report", c.output.report.string());
    c.output.csv_prefix = get_or<std::string>(o, "csv_prefix", c.output.csv_prefix.string());
    c.output.svg_dir = get_or<std::string>(o, "svg_dir", "");
  } catch (const json::exception& ex) {
    throw ValidationError(std::string("malformed config: ") + ex.what());
  }
  return c;
}

std::string ExperimentConfig::hash() const {
  json j = to_json();
  j.erase("output");
  j.erase("threads");
  const std::string text = j.dump();
  return channel::fnv1a_hex(text.data(), text.size());
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& ex) {
    throw ValidationError("config " + path.string() + " is not valid JSON: " + ex.what());
  }
  return ExperimentConfig::from_json(j);
}

std::vector<estimator::CorrelationTarget> expand_targets(const json& spec, int L) {
  std::vector<estimator::CorrelationTarget> out;
  const json list = spec.is_array() ? spec : json::array({spec});
  for (const auto& item : list) {
    if (item.is_string()) {
      const auto name = item.get<std::string>();
      if (name == "all_2pt") {
        for (int i = 0; i < L; ++i)
          for (int j = 0; j < L; ++j) out.push_back(estimator::CorrelationTarget::two_point(i, j));
      } else if (name == "row01_4pt") {
        require(L >= 2, "row01_4pt needs L >= 2");
        for (int k = 0; k < L; ++k)
          for (int l = 0; l < L; ++l) out.push_back(estimator::CorrelationTarget::four_point(0, 1, k, l));
      } else {
        throw ValidationError("unknown target selector '" + name + "'");
      }
    } else {
      estimator::CorrelationTarget t;
      t.creation = item.at("creation").get<std::vector<int>>();
      t.annihilation = item.at("annihilation").get<std::vector<int>>();
      t.k = static_cast<int>(t.creation.size());
      t.validate(L);
      out.push_back(t);
    }
  }
  return out;
}

fock::StateVector prepare_state(const ExperimentConfig& cfg) {
  switch (cfg.state.kind) {
    case StateKind::cdw_hubbard: {
      std::mt19937_64 rng(cfg.state.field_seed);
      std::uniform_real_distribution<double> g(cfg.state.g_min, cfg.state.g_max);
      std::vector<double> field(static_cast<std::size_t>(cfg.L));
      for (auto& v : field) v = g(rng);
      return fock::evolve(fock::cdw_state(cfg.L), fock::hubbard_hamiltonian(cfg.L, field), cfg.state.t0);
    }
    case StateKind::fock: {
      const auto bits = fock::OccupationOutcome::from_string(cfg.state.occupation).bits;
      return fock::fock_state(std::vector<int>(bits.begin(), bits.end()));
    }
    case StateKind::amplitudes: {
      auto s = load_amplitudes(cfg.state.amplitude_file);
      require(s.modes == cfg.L, "amplitude file mode count differs from L");
      return s;
    }
  }
  throw ValidationError("unknown state kind");
}

fock::StateVector load_amplitudes(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open amplitude file " + path.string());
  json j;
  try {
    in >> j;
    fock::StateVector s;
    s.modes = j.at("modes").get<int>();
    require(s.modes >= 1 && s.modes <= fock::kMaxModes, "amplitude file mode count out of range");
    const auto re = j.at("re").get<std::vector<double>>();
    const auto im = j.contains("im") ? j.at("im").get<std::vector<double>>() : std::vector<double>(re.size(), 0.0);
    require(re.size() == (std::size_t{1} << s.modes) && im.size() == re.size(),
            "amplitude vectors must have 2^modes entries");
    s.amplitudes.resize(static_cast<Eigen::Index>(re.size()));
    for (std::size_t b = 0; b < re.size(); ++b) s.amplitudes(static_cast<Eigen::Index>(b)) = {re[b], im[b]};
    require(s.norm() > 0.0, "amplitude vector is zero");
    s.amplitudes.normalize();
    return s;
  } catch (const json::exception& ex) {
    throw ValidationError("malformed amplitude file: " + std::string(ex.what()));
  }
}

std::filesystem::path default_cache_dir() {
  if (const char* env = std::getenv("FSHADOW_CACHE_DIR"); env && *env) return env;
  return "fshadow-cache";
}

}  // namespace fshadow::cli
