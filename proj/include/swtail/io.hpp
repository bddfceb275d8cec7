#pragma once

#include <charconv>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "swtail/check_types.hpp"
#include "swtail/errors.hpp"
#include "swtail/jump_process.hpp"
#include "swtail/model.hpp"
#include "swtail/montecarlo.hpp"
#include "swtail/spectral.hpp"

namespace swtail {

using json = nlohmann::json;

inline constexpr char kSamplesMagic[8] = {'S', 'W', 'T', 'L', '0', '0', '0', '1'};

namespace detail {

inline std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline std::ofstream open_out(const std::string& path, std::ios::openmode mode = std::ios::out) {
  std::ofstream out(path, mode);
  if (!out) fail(Errc::io_error, "cannot open for writing: " + path);
  return out;
}

}  // namespace detail

inline json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(Errc::io_error, "cannot open: " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    fail(Errc::io_error, path + ": " + e.what());
  }
}

inline SwitchingModel model_from_json(const json& j) {
  SwitchingModel m;
  try {
    const auto a = j.at("a").get<std::vector<double>>();
    const auto sigma = j.at("sigma").get<std::vector<double>>();
    const auto lambda = j.at("lambda").get<std::vector<double>>();
    const auto q = j.at("q").get<std::vector<std::vector<double>>>();
    m.a = Eigen::Map<const Eigen::VectorXd>(a.data(), a.size());
    m.sigma = Eigen::Map<const Eigen::VectorXd>(sigma.data(), sigma.size());
    m.lambda = Eigen::Map<const Eigen::VectorXd>(lambda.data(), lambda.size());
    m.q = Eigen::MatrixXd::Zero(q.size(), a.size());
    for (std::size_t i = 0; i < q.size(); ++i) {
      if (q[i].size() != a.size()) fail(Errc::invalid_shape, "kernel row has wrong length");
      for (std::size_t k = 0; k < q[i].size(); ++k) m.q(i, k) = q[i][k];
    }
    if (j.contains("names")) m.names = j.at("names").get<std::vector<std::string>>();
  } catch (const json::exception& e) {
    fail(Errc::io_error, std::string("model json: ") + e.what());
  }
  return validate_model(std::move(m));
}

inline SwitchingModel load_model(const std::string& path) {
  return model_from_json(load_json_file(path));
}

inline json model_to_json(const SwitchingModel& m) {
  json j;
  j["a"] = std::vector<double>(m.a.data(), m.a.data() + m.a.size());
  j["sigma"] = std::vector<double>(m.sigma.data(), m.sigma.data() + m.sigma.size());
  j["lambda"] = std::vector<double>(m.lambda.data(), m.lambda.data() + m.lambda.size());
  std::vector<std::vector<double>> q(m.n_states());
  for (int i = 0; i < m.n_states(); ++i)
    q[i].assign(m.q.row(i).begin(), m.q.row(i).end());
  j["q"] = q;
  if (!m.names.empty()) j["names"] = m.names;
  return j;
}

inline void write_samples_csv(const std::string& path, const std::vector<double>& values) {
  auto out = detail::open_out(path);
  for (const double v : values) out << detail::format_double(v) << '\n';
  if (!out) fail(Errc::io_error, "write failed: " + path);
}

inline void write_samples_bin(const std::string& path, const std::vector<double>& values) {
  auto out = detail::open_out(path, std::ios::out | std::ios::binary);
  out.write(kSamplesMagic, sizeof(kSamplesMagic));
  static_assert(sizeof(double) == 8);
  out.write(reinterpret_cast<const char*>(values.data()),
            static_cast<std::streamsize>(values.size() * sizeof(double)));
  if (!out) fail(Errc::io_error, "write failed: " + path);
}

// Auto-detects the binary magic; anything else is parsed as one value per line.
inline std::vector<double> read_samples(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(Errc::io_error, "cannot open: " + path);
  char magic[8] = {};
  in.read(magic, sizeof(magic));
  const auto got = in.gcount();
  std::vector<double> values;
  if (got == 8 && std::memcmp(magic, kSamplesMagic, 8) == 0) {
    double v;
    while (in.read(reinterpret_cast<char*>(&v), sizeof(v))) values.push_back(v);
    if (in.gcount() != 0) fail(Errc::io_error, path + ": truncated binary sample stream");
    return values;
  }
  in.clear();
  in.seekg(0);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    double v = 0.0;
    const char* begin = line.data();
    const char* end = line.data() + line.size();
    const auto res = std::from_chars(begin, end, v);
    if (res.ec != std::errc{} || res.ptr != end)
      fail(Errc::io_error, path + ": bad value on line " + std::to_string(line_no));
    values.push_back(v);
  }
  return values;
}

// Segment dump: one row per holding interval, durations in path order.
inline void write_path_csv(std::ostream& out, const JumpPath& path) {
  out << "segment_index,state,duration\n";
  for (std::size_t k = 0; k < path.segments.size(); ++k)
    out << k << ',' << path.segments[k].state << ','
        << detail::format_double(path.segments[k].duration) << '\n';
}

inline void write_path_csv(const std::string& path_name, const JumpPath& path) {
  auto out = detail::open_out(path_name);
  write_path_csv(out, path);
  if (!out) fail(Errc::io_error, "write failed: " + path_name);
}

inline json to_json(const KappaSolution& k) {
  return json{{"kappa", k.kappa},
              {"kappa_ms", k.kappa_ms},
              {"kappa_gs", k.kappa_gs},
              {"residual_ms", k.residual_ms},
              {"residual_gs", k.residual_gs}};
}

inline json curve_to_json(const std::vector<std::array<double, 2>>& curve) {
  json arr = json::array();
  for (const auto& p : curve) arr.push_back({p[0], p[1]});
  return arr;
}

inline json to_json(const SpectralReport& rep) {
  json j;
  j["alpha"] = rep.alpha;
  j["regime"] = regime_name(rep.regime);
  j["s1"] = std::isfinite(rep.s1) ? json(rep.s1) : json(nullptr);
  j["delta"] = rep.delta;
  if (rep.kappa) {
    j["kappa"] = rep.kappa->kappa;
    j["kappa_ms"] = rep.kappa->kappa_ms;
    j["kappa_gs"] = rep.kappa->kappa_gs;
    j["residual_ms"] = rep.kappa->residual_ms;
    j["residual_gs"] = rep.kappa->residual_gs;
  }
  j["derivative_at_zero"] = rep.derivative_at_zero;
  j["semigroup_defect"] = rep.semigroup_defect;
  j["rho_ms_curve"] = curve_to_json(rep.rho_ms_curve);
  j["log_rho_as_curve"] = curve_to_json(rep.log_rho_as_curve);
  return j;
}

inline json to_json(const TailEstimate& est) {
  json j;
  j["kappa_hat"] = est.kappa_hat;
  j["k_used"] = est.k_used;
  j["ci_low"] = est.ci_low;
  j["ci_high"] = est.ci_high;
  j["threshold"] = est.threshold;
  j["ccdf"] = curve_to_json(est.ccdf);
  j["prefactor_track"] = curve_to_json(est.prefactor_track);
  if (est.kappa_ref) j["kappa_ref"] = *est.kappa_ref;
  return j;
}

inline json to_json(const PlateauDiagnostic& d) {
  return json{{"k_fracs", d.k_fracs},
              {"estimates", d.estimates},
              {"spread", d.spread},
              {"pass", d.pass}};
}

inline json to_json(const std::vector<MomentProbe>& probes) {
  json arr = json::array();
  for (const auto& p : probes)
    arr.push_back({{"order", p.order},
                   {"mean_quarter", p.m_quarter},
                   {"mean_half", p.m_half},
                   {"mean_full", p.m_full},
                   {"ratio_half", p.ratio_half},
                   {"ratio_full", p.ratio_full},
                   {"stable", p.stable}});
  return arr;
}

inline json to_json(const std::vector<TailSymmetryPoint>& points) {
  json arr = json::array();
  for (const auto& p : points)
    arr.push_back({{"quantile", p.quantile},
                   {"t", p.t},
                   {"p_pos", p.p_pos},
                   {"p_neg", p.p_neg},
                   {"z", p.z}});
  return arr;
}

inline json matrix_to_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (int i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (int j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(row);
  }
  return rows;
}

inline json to_json(const LadderEstimate& est) {
  json j;
  j["h_hat"] = matrix_to_json(est.h_hat);
  j["h_se"] = matrix_to_json(est.h_se);
  j["row_sums"] = std::vector<double>(est.row_sums.data(), est.row_sums.data() + est.row_sums.size());
  j["rho_h"] = est.rho_h;
  j["rho_h_upper"] = est.rho_h_upper;
  json tail = json::array();
  for (const auto& p : est.max_tail) tail.push_back({p[0], p[1], p[2]});
  j["max_tail"] = tail;
  j["replicas"] = est.replicas;
  j["cutoff_drop"] = est.cutoff_drop;
  j["kappa"] = est.kappa;
  j["delta_walk"] = est.delta_walk;
  return j;
}

inline json to_json(const CheckReport& rep) {
  json items = json::array();
  for (const auto& item : rep.items) {
    json ji{{"name", item.name}, {"pass", item.pass}, {"measured", item.measured}};
    if (std::isfinite(item.limit)) ji["limit"] = item.limit;
    if (!item.note.empty()) ji["note"] = item.note;
    items.push_back(ji);
  }
  return json{{"items", items}, {"all_pass", rep.all_pass()}};
}

inline void write_json_file(const std::string& path, const json& j) {
  auto out = detail::open_out(path);
  out << j.dump(2) << '\n';
  if (!out) fail(Errc::io_error, "write failed: " + path);
}

}  // namespace swtail
