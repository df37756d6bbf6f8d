#include "quantrel/io.hpp"

#include "quantrel/errors.hpp"

#include <fstream>
#include <sstream>

namespace quantrel::io {

namespace {

std::string join(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

std::string at(const std::string& path, std::size_t i) {
  return path + "[" + std::to_string(i) + "]";
}

template <class F>
auto with_path(const std::string& path, F&& f) {
  const std::string p = path.empty() ? "<root>" : path;
  try {
    return f();
  } catch (const SignallingError& e) {
    throw SignallingError(p + ": " + e.what());
  } catch (const NotPsdError& e) {
    throw NotPsdError(p + ": " + e.what());
  } catch (const DimensionError& e) {
    throw DimensionError(p + ": " + e.what());
  } catch (const InconsistentAssemblageError& e) {
    throw InconsistentAssemblageError(p + ": " + e.what());
  } catch (const ValidationError& e) {
    throw ValidationError(p + ": " + e.what());
  }
}

const json& field(const json& j, const std::string& key, const std::string& path) {
  if (!j.is_object()) throw ValidationError((path.empty() ? "<root>" : path) + ": expected object");
  const auto it = j.find(key);
  if (it == j.end()) throw ValidationError(join(path, key) + ": missing field");
  return *it;
}

const json& array(const json& j, const std::string& path, std::size_t expect = 0) {
  if (!j.is_array()) throw ValidationError(path + ": expected array");
  if (expect && j.size() != expect) {
    throw DimensionError(path + ": expected " + std::to_string(expect) + " entries, got " +
                         std::to_string(j.size()));
  }
  return j;
}

double number(const json& j, const std::string& path) {
  if (!j.is_number()) throw ValidationError(path + ": expected number");
  return j.get<double>();
}

int positive_int(const json& j, const std::string& key, const std::string& path) {
  const json& v = field(j, key, path);
  if (!v.is_number_integer() || v.get<long long>() < 1) {
    throw ValidationError(join(path, key) + ": expected positive integer");
  }
  return v.get<int>();
}

std::vector<std::vector<HermitianOperator>> operator_grid(const json& j, int m, int n, int d,
                                                          const std::string& path) {
  array(j, path, m);
  std::vector<std::vector<HermitianOperator>> out(m);
  for (int x = 0; x < m; ++x) {
    const std::string px = at(path, x);
    array(j[x], px, n);
    for (int a = 0; a < n; ++a) {
      const std::string pa = at(px, a);
      HermitianOperator h = operator_from_json(j[x][a], pa);
      if (h.dim() != d) {
        throw DimensionError(pa + ": expected " + std::to_string(d) + "x" + std::to_string(d));
      }
      out[x].push_back(std::move(h));
    }
  }
  return out;
}

json grid_json(const std::vector<std::vector<HermitianOperator>>& g) {
  json out = json::array();
  for (const auto& row : g) {
    json r = json::array();
    for (const auto& h : row) r.push_back(to_json(h));
    out.push_back(std::move(r));
  }
  return out;
}

json rmatrix_json(const RMatrix& m) {
  json out = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json r = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) r.push_back(m(i, j));
    out.push_back(std::move(r));
  }
  return out;
}

json ops_json(const std::vector<HermitianOperator>& v) {
  json out = json::array();
  for (const auto& h : v) out.push_back(to_json(h));
  return out;
}

}  // namespace

json parse_json(const std::string& text, const std::string& source) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ValidationError(source + ": " + e.what());
  }
}

json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError(path + ": cannot open file");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_json(ss.str(), path);
}

void save_json(const std::string& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw ValidationError(path + ": cannot write file");
  out << j.dump(2) << "\n";
}

json to_json(const CMatrix& m) {
  json out = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json r = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) r.push_back({m(i, j).real(), m(i, j).imag()});
    out.push_back(std::move(r));
  }
  return out;
}

json to_json(const HermitianOperator& h) { return to_json(h.matrix()); }

HermitianOperator operator_from_json(const json& j, const std::string& path) {
  array(j, path);
  const std::size_t d = j.size();
  if (d == 0) throw DimensionError(path + ": empty matrix");
  CMatrix m(d, d);
  for (std::size_t i = 0; i < d; ++i) {
    const std::string pi = at(path, i);
    array(j[i], pi, d);
    for (std::size_t k = 0; k < d; ++k) {
      const std::string pk = at(pi, k);
      const json& e = j[i][k];
      if (e.is_number()) {
        m(i, k) = e.get<double>();
      } else {
        array(e, pk, 2);
        m(i, k) = cplx(number(e[0], at(pk, 0)), number(e[1], at(pk, 1)));
      }
    }
  }
  return with_path(path, [&] { return HermitianOperator(m); });
}

json to_json(const MeasurementSet& m) {
  return {{"m", m.inputs()}, {"n", m.outcomes()}, {"d", m.dim()}, {"effects", grid_json(m.effects())}};
}

MeasurementSet measurement_set_from_json(const json& j, const std::string& path) {
  const int m = positive_int(j, "m", path), n = positive_int(j, "n", path),
            d = positive_int(j, "d", path);
  auto g = operator_grid(field(j, "effects", path), m, n, d, join(path, "effects"));
  return with_path(join(path, "effects"), [&] { return MeasurementSet(std::move(g)); });
}

json to_json(const Assemblage& a) {
  return {{"m", a.inputs()}, {"n", a.outcomes()}, {"d", a.dim()}, {"members", grid_json(a.members())}};
}

Assemblage assemblage_from_json(const json& j, const std::string& path) {
  const int m = positive_int(j, "m", path), n = positive_int(j, "n", path),
            d = positive_int(j, "d", path);
  auto g = operator_grid(field(j, "members", path), m, n, d, join(path, "members"));
  return with_path(join(path, "members"), [&] { return Assemblage(std::move(g)); });
}

namespace {

json nested_table(const std::vector<double>& t, int mA, int nA, int mB, int nB) {
  json out = json::array();
  for (int x = 0; x < mA; ++x) {
    json tx = json::array();
    for (int y = 0; y < mB; ++y) {
      json ty = json::array();
      for (int a = 0; a < nA; ++a) {
        json ta = json::array();
        for (int b = 0; b < nB; ++b) ta.push_back(t[((x * mB + y) * nA + a) * nB + b]);
        ty.push_back(std::move(ta));
      }
      tx.push_back(std::move(ty));
    }
    out.push_back(std::move(tx));
  }
  return out;
}

}  // namespace

json to_json(const Behaviour& b) {
  const int mA = b.inputs_a(), nA = b.outcomes_a(), mB = b.inputs_b(), nB = b.outcomes_b();
  return {{"mA", mA}, {"nA", nA}, {"mB", mB}, {"nB", nB},
          {"table", nested_table(b.table(), mA, nA, mB, nB)}, {"signalling", b.signalling()}};
}

namespace {

template <class Read>
std::vector<double> read_table(const json& t, int mA, int nA, int mB, int nB,
                               const std::string& path, Read read) {
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(mA) * mB * nA * nB);
  array(t, path, mA);
  for (int x = 0; x < mA; ++x) {
    const std::string px = at(path, x);
    array(t[x], px, mB);
    for (int y = 0; y < mB; ++y) {
      const std::string py = at(px, y);
      array(t[x][y], py, nA);
      for (int a = 0; a < nA; ++a) {
        const std::string pa = at(py, a);
        array(t[x][y][a], pa, nB);
        for (int b = 0; b < nB; ++b) out.push_back(read(t[x][y][a][b], at(pa, b)));
      }
    }
  }
  return out;
}

}  // namespace

Behaviour behaviour_from_json(const json& j, const std::string& path) {
  const int mA = positive_int(j, "mA", path), nA = positive_int(j, "nA", path),
            mB = positive_int(j, "mB", path), nB = positive_int(j, "nB", path);
  const std::string tp = join(path, "table");
  auto t = read_table(field(j, "table", path), mA, nA, mB, nB, tp, number);
  bool sig = false;
  if (const auto it = j.find("signalling"); it != j.end()) {
    if (!it->is_boolean()) throw ValidationError(join(path, "signalling") + ": expected boolean");
    sig = it->get<bool>();
  }
  return with_path(tp, [&] { return Behaviour(mA, nA, mB, nB, std::move(t), sig); });
}

Behaviour behaviour_from_counts(const json& j, const std::string& path) {
  const std::string cp = join(path, "counts");
  const json& c = field(j, "counts", path);
  array(c, cp);
  if (c.empty()) throw DimensionError(cp + ": empty");
  const int mA = static_cast<int>(c.size());
  array(c[0], at(cp, 0));
  const int mB = static_cast<int>(c[0].size());
  if (mB == 0) throw DimensionError(at(cp, 0) + ": empty");
  array(c[0][0], at(at(cp, 0), 0));
  const int nA = static_cast<int>(c[0][0].size());
  if (nA == 0) throw DimensionError(at(at(cp, 0), 0) + ": empty");
  array(c[0][0][0], at(at(at(cp, 0), 0), 0));
  const int nB = static_cast<int>(c[0][0][0].size());
  if (nB == 0) throw DimensionError(at(at(at(cp, 0), 0), 0) + ": empty");
  auto t = read_table(c, mA, nA, mB, nB, cp, [](const json& v, const std::string& p) {
    if (!v.is_number_integer() || v.get<long long>() < 0) {
      throw ValidationError(p + ": expected nonnegative integer count");
    }
    return static_cast<double>(v.get<long long>());
  });
  const int slice = nA * nB;
  for (int s = 0; s < mA * mB; ++s) {
    double total = 0;
    for (int k = 0; k < slice; ++k) total += t[s * slice + k];
    if (total <= 0) {
      throw ValidationError(at(at(cp, s / mB), s % mB) + ": no counts for this setting pair");
    }
    for (int k = 0; k < slice; ++k) t[s * slice + k] /= total;
  }
  return Behaviour(mA, nA, mB, nB, std::move(t), true);
}

namespace {

std::string spec_field(const json& j, const std::string& key) {
  const json& v = field(j, key, "");
  if (!v.is_string()) throw ValidationError(key + ": expected spec string");
  return v.get<std::string>();
}

}  // namespace

MeasurementSet measurements_from_input(const json& j) {
  if (j.is_object() && j.contains("measurements")) {
    return with_path("measurements", [&] { return parse_measurement_spec(spec_field(j, "measurements")); });
  }
  return measurement_set_from_json(j);
}

Assemblage assemblage_from_input(const json& j) {
  if (j.is_object() && j.contains("state")) {
    const auto st = with_path("state", [&] { return make_state(parse_state_spec(spec_field(j, "state"))); });
    const auto m = with_path("alice", [&] { return parse_measurement_spec(spec_field(j, "alice")); });
    return steer(st, m);
  }
  return assemblage_from_json(j);
}

Behaviour behaviour_from_input(const json& j) {
  if (j.is_object() && j.contains("counts")) return behaviour_from_counts(j);
  if (j.is_object() && j.contains("state")) {
    const auto st = with_path("state", [&] { return make_state(parse_state_spec(spec_field(j, "state"))); });
    const auto a = with_path("alice", [&] { return parse_measurement_spec(spec_field(j, "alice")); });
    const auto b = with_path("bob", [&] { return parse_measurement_spec(spec_field(j, "bob")); });
    return measure(st, a, b);
  }
  return behaviour_from_json(j);
}

json to_json(const IncompatCertificate& c) {
  return {{"coefficients", grid_json(c.coefficients)}, {"y", to_json(c.y)},
          {"bound", c.bound}, {"value", c.value}, {"violation", c.violation}};
}

json to_json(const SteeringCertificate& c) {
  return {{"coefficients", grid_json(c.coefficients)}, {"bound", c.bound},
          {"enumerated_bound", c.enumerated_bound}, {"value", c.value},
          {"violation", c.violation}};
}

json to_json(const BellCertificate& c) {
  const BellScenario& s = c.functional.scenario;
  const json coef = nested_table(c.functional.coefficients, s.mA, s.nA, s.mB, s.nB);
  return {{"mA", s.mA}, {"nA", s.nA}, {"mB", s.mB}, {"nB", s.nB}, {"coefficients", coef},
          {"constant", c.functional.constant}, {"bound", c.bound},
          {"enumerated_bound", c.enumerated_bound}, {"value", c.value},
          {"violation", c.violation}, {"level_relaxed", c.level_relaxed}};
}

json to_json(const IncompatResult& r) {
  return {{"kind", to_string(r.kind)},
          {"value", r.value},
          {"gap", r.gap},
          {"iterations", r.iterations},
          {"noise_scaled", grid_json(r.noise_scaled)},
          {"parent_scaled", ops_json(r.parent_scaled)},
          {"certificate", to_json(r.certificate)}};
}

json to_json(const SteeringResult& r) {
  return {{"kind", to_string(r.kind)},
          {"value", r.value},
          {"gap", r.gap},
          {"iterations", r.iterations},
          {"model_scaled", ops_json(r.model_scaled)},
          {"noise_scaled", grid_json(r.noise_scaled)},
          {"certificate", to_json(r.certificate)}};
}

json to_json(const NonlocalityResult& r) {
  json j = {{"kind", to_string(r.kind)},
            {"value", r.value},
            {"exact", r.exact},
            {"status", r.exact ? "exact" : "certified lower bound"},
            {"gap", r.gap},
            {"iterations", r.iterations},
            {"local_scaled", rmatrix_json(r.local_scaled)},
            {"noise_scaled", nested_table(r.noise_scaled, r.certificate.functional.scenario.mA,
                                          r.certificate.functional.scenario.nA,
                                          r.certificate.functional.scenario.mB,
                                          r.certificate.functional.scenario.nB)},
            {"certificate", to_json(r.certificate)}};
  if (!r.exact) {
    j["level"] = r.level;
    j["noise_moment_matrix"] = rmatrix_json(r.noise_moment_matrix);
  }
  return j;
}

json to_json(const LocalModel& m) {
  return {{"mA", m.mA}, {"nA", m.nA}, {"mB", m.mB}, {"nB", m.nB},
          {"weights", rmatrix_json(m.weights)}};
}

json to_json(const NsProjection& p) {
  return {{"behaviour", to_json(p.behaviour)}, {"divergence", p.divergence},
          {"kkt_residual", p.kkt_residual},    {"iterations", p.iterations},
          {"converged", p.converged},          {"floored_entries", p.floored_entries}};
}

}  // namespace quantrel::io
