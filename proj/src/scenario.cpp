#include "cbf/scenario.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <ostream>
#include <sstream>

#include "cbf/errors.hpp"

namespace cbf {

std::uint64_t Rng::next_u64() {
  // splitmix64
  std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

double Rng::uniform() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::normal() {
  if (have_spare_) {
    have_spare_ = false;
    return spare_;
  }
  double u1 = uniform();
  while (u1 <= 0.0) u1 = uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double phi = 2.0 * std::numbers::pi * u2;
  spare_ = r * std::sin(phi);
  have_spare_ = true;
  return r * std::cos(phi);
}

std::complex<double> Rng::cnormal() {
  constexpr double inv_sqrt2 = 0.70710678118654752440;
  const double re = normal();
  const double im = normal();
  return {re * inv_sqrt2, im * inv_sqrt2};
}

Rng trial_rng(std::uint64_t seed, std::uint64_t trial) {
  Rng mix(seed ^ (0x9e3779b97f4a7c15ull * (trial + 1)));
  return Rng(mix.next_u64());
}

double dbm_to_watts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }

SolverSettings Scenario::solver_settings() const {
  SolverSettings s;
  s.eps = eps;
  s.alpha = alpha;
  s.max_iter = max_iter;
  s.normalize = normalize;
  return s;
}

NetworkConfig Scenario::make_config(double snr_db_point) const {
  NetworkConfig c;
  c.num_aps = num_aps;
  c.num_users = num_users;
  c.ap_antennas = ap_antennas;
  c.field_mode = field_mode;
  c.weights = Eigen::VectorXd::Ones(num_users);
  if (profile == ChannelProfile::Normalized) {
    // transmit SNR = P_l / sigma^2 with sigma^2 = 1 W, uniform budgets
    c.noise_powers = Eigen::VectorXd::Ones(num_users);
    c.power_budgets =
        Eigen::VectorXd::Constant(num_aps, std::pow(10.0, snr_db_point / 10.0));
  } else {
    c.noise_powers = Eigen::VectorXd::Constant(num_users, dbm_to_watts(noise_dbm));
    c.power_budgets = Eigen::VectorXd::Constant(num_aps, dbm_to_watts(power_dbm));
  }
  return c;
}

Scenario Scenario::with_size(int aps, int users, int antennas_each) const {
  Scenario s = *this;
  s.num_aps = aps;
  s.num_users = users;
  s.ap_antennas.assign(aps, antennas_each);
  return s;
}

ChannelRealization generate_channels(const Scenario& sc, int trial) {
  const int L = sc.num_aps, K = sc.num_users;
  int n_ant = 0;
  for (int nl : sc.ap_antennas) n_ant += nl;

  Rng rng = trial_rng(sc.seed, static_cast<std::uint64_t>(trial));
  ChannelRealization ch;
  ch.h.resize(n_ant, K);

  if (sc.profile == ChannelProfile::Normalized) {
    for (int k = 0; k < K; ++k)
      for (int a = 0; a < n_ant; ++a) ch.h(a, k) = rng.cnormal();
    if (sc.field_mode == FieldMode::Real) ch.h = ch.h.real().cast<std::complex<double>>();
    return ch;
  }

  // cellular: uniform placement in the square, then per-link large-scale gain
  std::vector<std::pair<double, double>> ap_pos(L), mu_pos(K);
  for (auto& p : ap_pos)
    p = {sc.half_width_m * (2.0 * rng.uniform() - 1.0),
         sc.half_width_m * (2.0 * rng.uniform() - 1.0)};
  for (auto& p : mu_pos)
    p = {sc.half_width_m * (2.0 * rng.uniform() - 1.0),
         sc.half_width_m * (2.0 * rng.uniform() - 1.0)};

  const double gain_lin = std::pow(10.0, sc.antenna_gain_dbi / 10.0);
  for (int k = 0; k < K; ++k) {
    int row = 0;
    for (int l = 0; l < L; ++l) {
      const double dx = ap_pos[l].first - mu_pos[k].first;
      const double dy = ap_pos[l].second - mu_pos[k].second;
      const double d = std::max(sc.min_distance_m, std::hypot(dx, dy));
      const double pl_db = sc.pathloss_a + sc.pathloss_b * std::log10(d / 1000.0);
      const double shadow_lin = std::pow(10.0, sc.shadowing_std_db * rng.normal() / 10.0);
      const double amp = std::pow(10.0, -pl_db / 20.0) * std::sqrt(gain_lin * shadow_lin);
      for (int a = 0; a < sc.ap_antennas[l]; ++a) ch.h(row++, k) = amp * rng.cnormal();
    }
  }
  if (sc.field_mode == FieldMode::Real) ch.h = ch.h.real().cast<std::complex<double>>();
  return ch;
}

namespace {

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

double to_double(const std::string& s, const std::string& key) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("bad numeric value '" + s + "' for key '" + key + "'");
  }
}

long to_long(const std::string& s, const std::string& key) {
  const double v = to_double(s, key);
  if (v != std::floor(v)) throw ConfigError("expected integer for key '" + key + "'");
  return static_cast<long>(v);
}

std::vector<double> to_double_list(const std::string& s, const std::string& key) {
  std::vector<double> out;
  for (const auto& part : split_list(s)) out.push_back(to_double(trim(part), key));
  return out;
}

std::vector<int> to_int_list(const std::string& s, const std::string& key) {
  std::vector<int> out;
  for (const auto& part : split_list(s)) out.push_back(static_cast<int>(to_long(trim(part), key)));
  return out;
}

}  // namespace

Scenario parse_scenario(std::istream& in) {
  Scenario sc;
  bool antennas_given = false;
  std::vector<int> antennas;
  std::string line;
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("expected 'key = value': " + line);
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));
    if (val.empty()) throw ConfigError("empty value for key '" + key + "'");

    if (key == "num_aps") sc.num_aps = static_cast<int>(to_long(val, key));
    else if (key == "num_users") sc.num_users = static_cast<int>(to_long(val, key));
    else if (key == "antennas_per_ap") { antennas = to_int_list(val, key); antennas_given = true; }
    else if (key == "field_mode") {
      if (val == "real") sc.field_mode = FieldMode::Real;
      else if (val == "complex") sc.field_mode = FieldMode::Complex;
      else throw ConfigError("field_mode must be 'real' or 'complex'");
    } else if (key == "profile") {
      if (val == "normalized") sc.profile = ChannelProfile::Normalized;
      else if (val == "cellular") sc.profile = ChannelProfile::Cellular;
      else throw ConfigError("profile must be 'normalized' or 'cellular'");
    }
    else if (key == "half_width_m") sc.half_width_m = to_double(val, key);
    else if (key == "pathloss_a") sc.pathloss_a = to_double(val, key);
    else if (key == "pathloss_b") sc.pathloss_b = to_double(val, key);
    else if (key == "shadowing_std_db") sc.shadowing_std_db = to_double(val, key);
    else if (key == "antenna_gain_dbi") sc.antenna_gain_dbi = to_double(val, key);
    else if (key == "min_distance_m") sc.min_distance_m = to_double(val, key);
    else if (key == "power_dbm") sc.power_dbm = to_double(val, key);
    else if (key == "noise_dbm") sc.noise_dbm = to_double(val, key);
    else if (key == "seed") sc.seed = static_cast<std::uint64_t>(to_long(val, key));
    else if (key == "trials") sc.trials = static_cast<int>(to_long(val, key));
    else if (key == "snr_db_list") sc.snr_db = to_double_list(val, key);
    else if (key == "density_snr_db") sc.density_snr_db = to_double(val, key);
    else if (key == "density_ap_list") sc.density_aps = to_int_list(val, key);
    else if (key == "density_user_ratio") sc.density_user_ratio = to_double(val, key);
    else if (key == "bench_refreshes") sc.bench_refreshes = static_cast<int>(to_long(val, key));
    else if (key == "solve_sizes") sc.solve_sizes = to_int_list(val, key);
    else if (key == "eps") sc.eps = to_double(val, key);
    else if (key == "alpha") sc.alpha = to_double(val, key);
    else if (key == "max_iter") sc.max_iter = static_cast<int>(to_long(val, key));
    else if (key == "normalize") {
      if (val == "true" || val == "1") sc.normalize = true;
      else if (val == "false" || val == "0") sc.normalize = false;
      else throw ConfigError("normalize must be true or false");
    }
    else if (key == "eps_rate") sc.eps_rate = to_double(val, key);
    else if (key == "threads") sc.threads = static_cast<int>(to_long(val, key));
    else throw ConfigError("unknown scenario key '" + key + "'");
  }

  if (sc.num_aps < 1 || sc.num_users < 1)
    throw ConfigError("num_aps and num_users must be positive");
  if (sc.trials < 0) throw ConfigError("trials must be nonnegative");
  if (antennas_given) {
    if (antennas.size() == 1) antennas.assign(sc.num_aps, antennas[0]);
    if (static_cast<int>(antennas.size()) != sc.num_aps)
      throw ConfigError("antennas_per_ap must have one entry or one per AP");
    sc.ap_antennas = antennas;
  } else {
    sc.ap_antennas.assign(sc.num_aps, 1);
  }
  return sc;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open scenario file '" + path + "'");
  return parse_scenario(f);
}

void write_scenario_header(const Scenario& sc, std::ostream& os, bool deterministic) {
  char buf[256];
  os << "# cbf scenario\n";
  std::snprintf(buf, sizeof buf, "# profile=%s L=%d K=%d mode=%s antennas=",
                sc.profile == ChannelProfile::Normalized ? "normalized" : "cellular",
                sc.num_aps, sc.num_users,
                sc.field_mode == FieldMode::Complex ? "complex" : "real");
  os << buf;
  for (std::size_t i = 0; i < sc.ap_antennas.size(); ++i)
    os << (i ? "," : "") << sc.ap_antennas[i];
  os << "\n";
  if (sc.profile == ChannelProfile::Cellular) {
    std::snprintf(buf, sizeof buf,
                  "# half_width_m=%g pathloss=[%g,%g] shadowing_db=%g gain_dbi=%g "
                  "power_dbm=%g noise_dbm=%g\n",
                  sc.half_width_m, sc.pathloss_a, sc.pathloss_b, sc.shadowing_std_db,
                  sc.antenna_gain_dbi, sc.power_dbm, sc.noise_dbm);
    os << buf;
  } else {
    os << "# normalized channel: sigma^2=1 W, P=10^(snr_db/10) W per AP\n";
  }
  std::snprintf(buf, sizeof buf,
                "# seed=%llu trials=%d eps=%g eps_rate=%g alpha=%g max_iter=%d "
                "normalize=%d\n",
                static_cast<unsigned long long>(sc.seed), sc.trials, sc.eps, sc.eps_rate,
                sc.alpha, sc.max_iter, sc.normalize ? 1 : 0);
  os << buf;
  if (!deterministic) {
    const auto now = std::chrono::system_clock::now();
    const auto t = std::chrono::system_clock::to_time_t(now);
    os << "# generated: " << t << "\n";
  }
}

}  // namespace cbf
