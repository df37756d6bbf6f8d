#include "quantrel/scenario.hpp"

#include "quantrel/errors.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numbers>
#include <sstream>

namespace quantrel {

namespace {

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

double parse_double(const std::string& s) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ValidationError("cannot parse number '" + s + "'");
  }
}

}  // namespace

// ---------------------------------------------------------------- MeasurementSet

MeasurementSet::MeasurementSet(std::vector<std::vector<HermitianOperator>> effects, double tol) {
  if (effects.empty()) throw ValidationError("measurement set needs at least one input");
  m_ = static_cast<int>(effects.size());
  n_ = 0;
  d_ = -1;
  for (const auto& povm : effects) {
    n_ = std::max<int>(n_, static_cast<int>(povm.size()));
    for (const auto& e : povm) {
      if (d_ < 0) d_ = e.dim();
      if (e.dim() != d_) throw DimensionError("measurement effects have differing dimensions");
    }
  }
  if (n_ == 0 || d_ <= 0) throw ValidationError("measurement set has no effects");
  for (auto& povm : effects) {
    while (static_cast<int>(povm.size()) < n_) povm.push_back(HermitianOperator::zero(d_));
  }
  const CMatrix id = CMatrix::Identity(d_, d_);
  for (int x = 0; x < m_; ++x) {
    CMatrix sum = CMatrix::Zero(d_, d_);
    for (int a = 0; a < n_; ++a) {
      const double lmin = min_eigenvalue(effects[x][a]);
      if (lmin < -tol) {
        throw NotPsdError("effect M_{" + std::to_string(a) + "|" + std::to_string(x) +
                          "} has eigenvalue " + fmt(lmin));
      }
      sum += effects[x][a].matrix();
    }
    const double err = max_abs_diff(sum, id);
    if (err > tol) {
      throw ValidationError("effects of input " + std::to_string(x) +
                            " do not sum to identity (error " + fmt(err) + ")");
    }
  }
  effects_ = std::move(effects);
}

bool MeasurementSet::is_real() const {
  for (const auto& povm : effects_)
    for (const auto& e : povm)
      if (!e.is_real()) return false;
  return true;
}

MeasurementSet MeasurementSet::select(const std::vector<int>& inputs) const {
  std::vector<std::vector<HermitianOperator>> eff;
  for (int x : inputs) {
    if (x < 0 || x >= m_) throw ValidationError("select: input index out of range");
    eff.push_back(effects_[x]);
  }
  return MeasurementSet(std::move(eff));
}

MeasurementSet MeasurementSet::conjugated(const CMatrix& u) const {
  auto eff = effects_;
  for (auto& povm : eff)
    for (auto& e : povm) e = e.conjugated(u);
  return MeasurementSet(std::move(eff));
}

// ---------------------------------------------------------------- BipartiteState

BipartiteState::BipartiteState(int dA, int dB, HermitianOperator rho, double tol)
    : dA_(dA), dB_(dB), rho_(std::move(rho)) {
  if (dA < 1 || dB < 1 || rho_.dim() != dA * dB) {
    throw DimensionError("state dimension " + std::to_string(rho_.dim()) + " != dA*dB");
  }
  const double lmin = min_eigenvalue(rho_);
  if (lmin < -tol) throw NotPsdError("state has negative eigenvalue " + fmt(lmin));
  if (std::abs(rho_.trace() - 1.0) > tol) {
    throw ValidationError("state trace " + fmt(rho_.trace()) + " != 1");
  }
}

// ---------------------------------------------------------------- Assemblage

Assemblage::Assemblage(std::vector<std::vector<HermitianOperator>> members, double tol) {
  if (members.empty() || members.front().empty()) {
    throw ValidationError("assemblage needs at least one input and outcome");
  }
  m_ = static_cast<int>(members.size());
  n_ = 0;
  for (const auto& row : members) n_ = std::max<int>(n_, static_cast<int>(row.size()));
  d_ = members.front().front().dim();
  for (auto& row : members) {
    while (static_cast<int>(row.size()) < n_) row.push_back(HermitianOperator::zero(d_));
  }
  CMatrix rho0;
  for (int x = 0; x < m_; ++x) {
    CMatrix sum = CMatrix::Zero(d_, d_);
    for (int a = 0; a < n_; ++a) {
      const auto& s = members[x][a];
      if (s.dim() != d_) throw DimensionError("assemblage members have differing dimensions");
      const double lmin = min_eigenvalue(s);
      if (lmin < -tol) {
        throw NotPsdError("sigma_{" + std::to_string(a) + "|" + std::to_string(x) +
                          "} has eigenvalue " + fmt(lmin));
      }
      sum += s.matrix();
    }
    if (x == 0) {
      rho0 = sum;
      if (std::abs(sum.trace().real() - 1.0) > tol) {
        throw ValidationError("assemblage reduced state has trace " + fmt(sum.trace().real()));
      }
    } else if (max_abs_diff(sum, rho0) > tol) {
      throw InconsistentAssemblageError("assemblage signals to Bob: reduced state of input " +
                                        std::to_string(x) + " differs by " +
                                        fmt(max_abs_diff(sum, rho0)));
    }
  }
  members_ = std::move(members);
}

bool Assemblage::is_real() const {
  for (const auto& row : members_)
    for (const auto& s : row)
      if (!s.is_real()) return false;
  return true;
}

Assemblage Assemblage::conjugated(const CMatrix& u) const {
  auto mem = members_;
  for (auto& row : mem)
    for (auto& s : row) s = s.conjugated(u);
  return Assemblage(std::move(mem));
}

// ---------------------------------------------------------------- Behaviour

Behaviour::Behaviour(int mA, int nA, int mB, int nB, std::vector<double> table,
                     bool allow_signalling, double ns_tol)
    : mA_(mA), nA_(nA), mB_(mB), nB_(nB), table_(std::move(table)) {
  if (mA < 1 || nA < 1 || mB < 1 || nB < 1) throw ValidationError("behaviour dimensions < 1");
  if (table_.size() != static_cast<std::size_t>(mA) * nA * mB * nB) {
    throw DimensionError("behaviour table has " + std::to_string(table_.size()) +
                         " entries, expected " + std::to_string(mA * nA * mB * nB));
  }
  for (int x = 0; x < mA; ++x) {
    for (int y = 0; y < mB; ++y) {
      double sum = 0;
      for (int a = 0; a < nA; ++a) {
        for (int b = 0; b < nB; ++b) {
          const double v = p(a, b, x, y);
          if (!std::isfinite(v) || v < -1e-12) {
            throw ValidationError("behaviour entry P(" + std::to_string(a) + std::to_string(b) +
                                  "|" + std::to_string(x) + std::to_string(y) +
                                  ") = " + fmt(v) + " is negative");
          }
          sum += v;
        }
      }
      if (std::abs(sum - 1.0) > std::max(1e-9, allow_signalling ? 1e-6 : 1e-9)) {
        throw ValidationError("behaviour slice (x=" + std::to_string(x) + ", y=" +
                              std::to_string(y) + ") sums to " + fmt(sum));
      }
    }
  }
  const double dev = signalling_deviation();
  signalling_ = dev > ns_tol;
  if (signalling_ && !allow_signalling) {
    throw SignallingError("behaviour violates no-signalling by " + fmt(dev));
  }
}

double Behaviour::signalling_deviation() const {
  double dev = 0;
  // Bob's marginal independent of x.
  for (int y = 0; y < mB_; ++y) {
    for (int b = 0; b < nB_; ++b) {
      double ref = 0;
      for (int x = 0; x < mA_; ++x) {
        double m = 0;
        for (int a = 0; a < nA_; ++a) m += p(a, b, x, y);
        if (x == 0) ref = m;
        dev = std::max(dev, std::abs(m - ref));
      }
    }
  }
  for (int x = 0; x < mA_; ++x) {
    for (int a = 0; a < nA_; ++a) {
      double ref = 0;
      for (int y = 0; y < mB_; ++y) {
        double m = 0;
        for (int b = 0; b < nB_; ++b) m += p(a, b, x, y);
        if (y == 0) ref = m;
        dev = std::max(dev, std::abs(m - ref));
      }
    }
  }
  return dev;
}

// ---------------------------------------------------------------- strategies

std::int64_t strategy_count(int inputs, int outcomes, std::int64_t cap) {
  if (inputs < 1 || outcomes < 1) throw ValidationError("strategy count needs m, n >= 1");
  std::int64_t count = 1;
  for (int i = 0; i < inputs; ++i) {
    count *= outcomes;
    if (count > cap) {
      std::ostringstream os;
      os << "n^m = " << outcomes << "^" << inputs << " = " << std::fixed << std::setprecision(0)
         << std::pow(double(outcomes), inputs)
         << " deterministic strategies exceeds cap " << cap;
      throw ResourceError(os.str());
    }
  }
  return count;
}

std::int64_t strategy_index(const std::vector<int>& assignment, int outcomes) {
  std::int64_t idx = 0;
  for (int a : assignment) idx = idx * outcomes + a;
  return idx;
}

std::vector<DeterministicStrategy> enumerate_strategies(int inputs, int outcomes,
                                                        std::int64_t cap) {
  const std::int64_t count = strategy_count(inputs, outcomes, cap);
  std::vector<DeterministicStrategy> out(static_cast<std::size_t>(count));
  std::vector<int> cur(inputs, 0);
  for (std::int64_t k = 0; k < count; ++k) {
    out[k].assignment = cur;
    out[k].index = k;
    for (int x = inputs - 1; x >= 0; --x) {
      if (++cur[x] < outcomes) break;
      cur[x] = 0;
    }
  }
  return out;
}

Behaviour LocalModel::behaviour() const {
  const auto sa = enumerate_strategies(mA, nA);
  const auto sb = enumerate_strategies(mB, nB);
  std::vector<double> t(static_cast<std::size_t>(mA) * nA * mB * nB, 0.0);
  auto idx = [&](int a, int b, int x, int y) { return ((x * mB + y) * nA + a) * nB + b; };
  for (std::size_t mu = 0; mu < sa.size(); ++mu) {
    for (std::size_t nu = 0; nu < sb.size(); ++nu) {
      const double w = weights(mu, nu);
      if (w == 0) continue;
      for (int x = 0; x < mA; ++x)
        for (int y = 0; y < mB; ++y) t[idx(sa[mu].assignment[x], sb[nu].assignment[y], x, y)] += w;
    }
  }
  return Behaviour(mA, nA, mB, nB, std::move(t), true, 1e-7);
}

Assemblage LhsModel::assemblage() const {
  const auto strategies = enumerate_strategies(inputs, outcomes);
  const int d = states.front().dim();
  std::vector<std::vector<HermitianOperator>> mem(
      inputs, std::vector<HermitianOperator>(outcomes, HermitianOperator::zero(d)));
  for (std::size_t l = 0; l < strategies.size(); ++l) {
    for (int x = 0; x < inputs; ++x) mem[x][strategies[l].assignment[x]] += states[l];
  }
  return Assemblage(std::move(mem), 1e-7);
}

HermitianOperator ParentPovm::marginal(int x, int a) const {
  const auto strategies = enumerate_strategies(inputs, outcomes);
  HermitianOperator sum = HermitianOperator::zero(effects.front().dim());
  for (std::size_t l = 0; l < strategies.size(); ++l) {
    if (strategies[l].assignment[x] == a) sum += effects[l];
  }
  return sum;
}

// ---------------------------------------------------------------- constructors

namespace {

CVector basis_vector(int d, int i) {
  CVector v = CVector::Zero(d);
  v(i) = 1.0;
  return v;
}

}  // namespace

BipartiteState make_state(const StateSpec& spec) {
  switch (spec.family) {
    case StateFamily::werner: {
      const double v = spec.param;
      if (!(v >= 0.0 && v <= 1.0)) throw ValidationError("werner visibility must be in [0,1]");
      CVector psi = CVector::Zero(4);
      if (spec.singlet_base) {
        psi(1) = 1.0 / std::sqrt(2.0);
        psi(2) = -1.0 / std::sqrt(2.0);
      } else {
        psi(0) = 1.0 / std::sqrt(2.0);
        psi(3) = 1.0 / std::sqrt(2.0);
      }
      CMatrix rho = v * psi * psi.adjoint() + (1.0 - v) * CMatrix::Identity(4, 4) / 4.0;
      return BipartiteState(2, 2, HermitianOperator(rho));
    }
    case StateFamily::pure_theta: {
      const double th = spec.param;
      if (!(th > 0.0 && th <= std::numbers::pi / 4 + 1e-12)) {
        throw ValidationError("pure_theta angle must be in (0, pi/4]");
      }
      CVector psi = std::cos(th) * basis_vector(4, 0) + std::sin(th) * basis_vector(4, 3);
      return BipartiteState(2, 2, HermitianOperator::projector(psi));
    }
    case StateFamily::max_entangled: {
      const int d = spec.dim;
      if (d < 1) throw ValidationError("max_entangled dimension must be >= 1");
      CVector psi = CVector::Zero(d * d);
      for (int i = 0; i < d; ++i) psi(i * d + i) = 1.0 / std::sqrt(double(d));
      return BipartiteState(d, d, HermitianOperator::projector(psi));
    }
    case StateFamily::singlet: {
      CVector psi = (basis_vector(4, 1) - basis_vector(4, 2)) / std::sqrt(2.0);
      return BipartiteState(2, 2, HermitianOperator::projector(psi));
    }
  }
  throw ValidationError("unknown state family");
}

StateSpec parse_state_spec(const std::string& text) {
  const auto parts = split(text, ':');
  const std::string& kind = parts[0];
  auto arg = [&]() {
    if (parts.size() != 2) throw ValidationError("state spec '" + text + "' needs one parameter");
    return parse_double(parts[1]);
  };
  if (kind == "werner") return StateSpec::werner(arg());
  if (kind == "werner_singlet") return StateSpec::werner(arg(), true);
  if (kind == "pure_theta") return StateSpec::pure_theta(arg());
  if (kind == "max_entangled") return StateSpec::max_entangled(static_cast<int>(arg()));
  if (kind == "singlet" && parts.size() == 1) return StateSpec::singlet();
  throw ValidationError("unknown state spec '" + text + "'");
}

MeasurementSet bloch_measurements(const std::vector<std::array<double, 3>>& directions) {
  std::vector<std::vector<HermitianOperator>> eff;
  const CMatrix id = CMatrix::Identity(2, 2);
  const CMatrix sx = pauli_x().matrix(), sy = pauli_y().matrix(), sz = pauli_z().matrix();
  for (const auto& n : directions) {
    const double norm = std::sqrt(n[0] * n[0] + n[1] * n[1] + n[2] * n[2]);
    if (std::abs(norm - 1.0) > 1e-9) {
      throw ValidationError("Bloch vector has norm " + fmt(norm) + ", expected 1");
    }
    const CMatrix ns = n[0] * sx + n[1] * sy + n[2] * sz;
    eff.push_back({HermitianOperator(CMatrix((id + ns) / 2.0)),
                   HermitianOperator(CMatrix((id - ns) / 2.0))});
  }
  return MeasurementSet(std::move(eff));
}

MeasurementSet pauli_measurements(const std::string& axes) {
  std::vector<std::array<double, 3>> dirs;
  for (char c : axes) {
    switch (c) {
      case 'X': dirs.push_back({1, 0, 0}); break;
      case 'Y': dirs.push_back({0, 1, 0}); break;
      case 'Z': dirs.push_back({0, 0, 1}); break;
      default: throw ValidationError(std::string("unknown Pauli axis '") + c + "'");
    }
  }
  return bloch_measurements(dirs);
}

MeasurementSet lossy_measurements(const MeasurementSet& base, const std::vector<double>& eta) {
  if (static_cast<int>(eta.size()) != base.inputs()) {
    throw ValidationError("lossy: need one efficiency per input");
  }
  const int d = base.dim();
  std::vector<std::vector<HermitianOperator>> eff;
  for (int x = 0; x < base.inputs(); ++x) {
    if (!(eta[x] >= 0.0 && eta[x] <= 1.0)) throw ValidationError("lossy: eta must be in [0,1]");
    std::vector<HermitianOperator> povm;
    for (int a = 0; a < base.outcomes(); ++a) povm.push_back(base.effect(x, a) * eta[x]);
    povm.push_back(HermitianOperator::identity(d) * (1.0 - eta[x]));
    eff.push_back(std::move(povm));
  }
  return MeasurementSet(std::move(eff));
}

std::vector<std::array<double, 3>> dodecahedron_directions() {
  const double phi = (1.0 + std::sqrt(5.0)) / 2.0;
  std::vector<std::array<double, 3>> verts;
  for (int sx : {1, -1})
    for (int sy : {1, -1})
      for (int sz : {1, -1}) verts.push_back({double(sx), double(sy), double(sz)});
  for (int s1 : {1, -1}) {
    for (int s2 : {1, -1}) {
      const double p = s1 / phi, q = s2 * phi;
      verts.push_back({0.0, p, q});
      verts.push_back({p, q, 0.0});
      verts.push_back({q, 0.0, p});
    }
  }
  std::vector<std::array<double, 3>> reps;
  for (auto v : verts) {
    const double first = v[0] != 0.0 ? v[0] : (v[1] != 0.0 ? v[1] : v[2]);
    if (first <= 0.0) continue;
    const double n = std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
    reps.push_back({v[0] / n, v[1] / n, v[2] / n});
  }
  return reps;
}

MeasurementSet dodecahedron_measurements() { return bloch_measurements(dodecahedron_directions()); }

MeasurementSet parse_measurement_spec(const std::string& text) {
  const auto parts = split(text, ':');
  const std::string& kind = parts[0];
  auto parse_list = [](const std::string& s) {
    std::vector<double> v;
    for (const auto& p : split(s, ',')) v.push_back(parse_double(p));
    return v;
  };
  if (kind == "paulis" && parts.size() == 2) return pauli_measurements(parts[1]);
  if (kind == "lossy_paulis" && parts.size() == 3) {
    return lossy_measurements(pauli_measurements(parts[1]), parse_list(parts[2]));
  }
  if (kind == "dodecahedron" && parts.size() == 1) return dodecahedron_measurements();
  if (kind == "chsh_bob" && parts.size() == 1) {
    const double h = 1.0 / std::sqrt(2.0);
    return bloch_measurements({{h, 0.0, h}, {h, 0.0, -h}});
  }
  if (kind == "lossy_dodecahedron" && parts.size() == 2) {
    return lossy_measurements(dodecahedron_measurements(),
                              std::vector<double>(10, parse_double(parts[1])));
  }
  if (kind == "bloch" && parts.size() == 2) {
    std::vector<std::array<double, 3>> dirs;
    for (const auto& vec : split(parts[1], ';')) {
      const auto c = parse_list(vec);
      if (c.size() != 3) throw ValidationError("bloch vector needs 3 components");
      dirs.push_back({c[0], c[1], c[2]});
    }
    return bloch_measurements(dirs);
  }
  throw ValidationError("unknown measurement spec '" + text + "'");
}

// ---------------------------------------------------------------- maps

Assemblage steer(const BipartiteState& state, const MeasurementSet& measurements) {
  if (measurements.dim() != state.dim_a()) {
    throw DimensionError("steer: measurement dimension " + std::to_string(measurements.dim()) +
                         " != dA " + std::to_string(state.dim_a()));
  }
  const int dA = state.dim_a(), dB = state.dim_b();
  const CMatrix idB = CMatrix::Identity(dB, dB);
  std::vector<std::vector<HermitianOperator>> mem(measurements.inputs());
  for (int x = 0; x < measurements.inputs(); ++x) {
    for (int a = 0; a < measurements.outcomes(); ++a) {
      const CMatrix prod = kron(measurements.effect(x, a).matrix(), idB) * state.rho().matrix();
      CMatrix r = partial_trace(prod, dA, dB, Subsystem::B);
      mem[x].push_back(make_hermitian_unchecked(0.5 * (r + r.adjoint())));
    }
  }
  return Assemblage(std::move(mem));
}

Behaviour measure(const Assemblage& assemblage, const MeasurementSet& bob) {
  if (bob.dim() != assemblage.dim()) {
    throw DimensionError("measure: Bob's dimension does not match assemblage");
  }
  const int mA = assemblage.inputs(), nA = assemblage.outcomes();
  const int mB = bob.inputs(), nB = bob.outcomes();
  std::vector<double> t(static_cast<std::size_t>(mA) * nA * mB * nB);
  // Bob's marginal is computed once from the reduced state so the table is
  // no-signalling to rounding, then each row of a|x is corrected to it.
  const HermitianOperator rhoB = reduced_state(assemblage, 1e-7);
  for (int x = 0; x < mA; ++x) {
    for (int y = 0; y < mB; ++y) {
      for (int b = 0; b < nB; ++b) {
        const double marg = (bob.effect(y, b).matrix() * rhoB.matrix()).trace().real();
        double sum = 0;
        for (int a = 0; a < nA; ++a) {
          const double v =
              (bob.effect(y, b).matrix() * assemblage.member(x, a).matrix()).trace().real();
          t[((x * mB + y) * nA + a) * nB + b] = v;
          sum += v;
        }
        t[((x * mB + y) * nA + (nA - 1)) * nB + b] += marg - sum;
      }
    }
  }
  for (double& v : t) v = std::max(v, 0.0);
  return Behaviour(mA, nA, mB, nB, std::move(t), false, 1e-9);
}

Behaviour measure(const BipartiteState& state, const MeasurementSet& alice,
                  const MeasurementSet& bob) {
  return measure(steer(state, alice), bob);
}

HermitianOperator reduced_state(const Assemblage& assemblage, double tol) {
  HermitianOperator first;
  for (int x = 0; x < assemblage.inputs(); ++x) {
    HermitianOperator sum = HermitianOperator::zero(assemblage.dim());
    for (int a = 0; a < assemblage.outcomes(); ++a) sum += assemblage.member(x, a);
    if (x == 0) {
      first = sum;
    } else if (max_abs_diff(sum.matrix(), first.matrix()) > tol) {
      throw InconsistentAssemblageError("reduced state depends on input " + std::to_string(x));
    }
  }
  return first;
}

std::vector<std::vector<double>> behaviour_marginal(const Behaviour& b, Party party,
                                                    bool average_inputs, double tol) {
  const bool bob = party == Party::bob;
  const int m_self = bob ? b.inputs_b() : b.inputs_a();
  const int n_self = bob ? b.outcomes_b() : b.outcomes_a();
  const int m_other = bob ? b.inputs_a() : b.inputs_b();
  const int n_other = bob ? b.outcomes_a() : b.outcomes_b();
  std::vector<std::vector<double>> out(m_self, std::vector<double>(n_self, 0.0));
  double dev = 0;
  for (int s = 0; s < m_self; ++s) {
    for (int o = 0; o < n_self; ++o) {
      double ref = 0, acc = 0;
      for (int t = 0; t < m_other; ++t) {
        double v = 0;
        for (int k = 0; k < n_other; ++k) v += bob ? b.p(k, o, t, s) : b.p(o, k, s, t);
        if (t == 0) ref = v;
        dev = std::max(dev, std::abs(v - ref));
        acc += v;
      }
      out[s][o] = average_inputs ? acc / m_other : ref;
    }
  }
  if (dev > tol && !average_inputs) {
    throw SignallingError("marginal depends on the other party's input (deviation " + fmt(dev) +
                          ")");
  }
  return out;
}

Behaviour isotropic_chsh(double v) {
  if (!(v >= 0.0 && v <= 1.0)) throw ValidationError("isotropic_chsh: v must be in [0,1]");
  std::vector<double> t(16);
  for (int x = 0; x < 2; ++x)
    for (int y = 0; y < 2; ++y)
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) {
          const int parity = (a ^ b ^ (x & y)) ? -1 : 1;
          t[((x * 2 + y) * 2 + a) * 2 + b] = (1.0 + parity * v / std::sqrt(2.0)) / 4.0;
        }
  return Behaviour(2, 2, 2, 2, std::move(t));
}

Behaviour uniform_behaviour(int mA, int nA, int mB, int nB) {
  return Behaviour(mA, nA, mB, nB,
                   std::vector<double>(static_cast<std::size_t>(mA) * nA * mB * nB,
                                       1.0 / (nA * nB)));
}

}  // namespace quantrel
