#include "lightcone/spin_sim.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>

namespace lightcone::spin {

using Eigen::Index;
using Eigen::MatrixXcd;
using Eigen::VectorXcd;
using Eigen::VectorXd;

namespace {

constexpr cplx kI(0.0, 1.0);

std::uint64_t dim_of(int num_sites) { return std::uint64_t{1} << num_sites; }

void require_same_size(const OperatorState& a, const OperatorState& b) {
  if (a.num_sites() != b.num_sites()) throw std::invalid_argument("operator size mismatch");
}

void check_dense_size(int num_sites) {
  if (num_sites > kMaxDenseOperatorSites)
    throw std::length_error("dense operator on " + std::to_string(num_sites) +
                            " sites exceeds the cap of " + std::to_string(kMaxDenseOperatorSites));
}

// In-place unnormalized Walsh-Hadamard transform.
void walsh_hadamard(VectorXcd& v) {
  const Index n = v.size();
  for (Index h = 1; h < n; h <<= 1)
    for (Index i = 0; i < n; i += 2 * h)
      for (Index j = i; j < i + h; ++j) {
        cplx a = v[j], b = v[j + h];
        v[j] = a + b;
        v[j + h] = a - b;
      }
}

std::uint64_t region_mask(const Region& X) {
  std::uint64_t m = 0;
  for (Site s : X) {
    if (s < 0 || s >= kMaxPauliSites) throw std::out_of_range("site outside Pauli range");
    m |= std::uint64_t{1} << s;
  }
  return m;
}

// Offsets of the 2^k local configurations of `sites` inside a global basis index.
std::vector<std::uint64_t> local_offsets(const std::vector<int>& sites) {
  const std::size_t k = sites.size();
  std::vector<std::uint64_t> off(std::size_t{1} << k, 0);
  for (std::size_t l = 0; l < off.size(); ++l)
    for (std::size_t m = 0; m < k; ++m)
      if ((l >> m) & 1u) off[l] |= std::uint64_t{1} << sites[m];
  return off;
}

// M <- G_full * M where G acts on `sites` (local bit m <-> sites[m]).
void apply_gate_rows(MatrixXcd& M, const std::vector<int>& sites, const MatrixXcd& G) {
  const auto off = local_offsets(sites);
  const std::uint64_t mask = off.back();
  const Index dk = static_cast<Index>(off.size());
  MatrixXcd block(dk, M.cols()), out(dk, M.cols());
  for (std::uint64_t base = 0; base < static_cast<std::uint64_t>(M.rows()); ++base) {
    if (base & mask) continue;
    for (Index l = 0; l < dk; ++l) block.row(l) = M.row(static_cast<Index>(base + off[l]));
    out.noalias() = G * block;
    for (Index l = 0; l < dk; ++l) M.row(static_cast<Index>(base + off[l])) = out.row(l);
  }
}

void apply_gate_vector(VectorXcd& v, const std::vector<int>& sites, const MatrixXcd& G) {
  const auto off = local_offsets(sites);
  const std::uint64_t mask = off.back();
  const Index dk = static_cast<Index>(off.size());
  VectorXcd block(dk), out(dk);
  for (std::uint64_t base = 0; base < static_cast<std::uint64_t>(v.size()); ++base) {
    if (base & mask) continue;
    for (Index l = 0; l < dk; ++l) block[l] = v[static_cast<Index>(base + off[l])];
    out.noalias() = G * block;
    for (Index l = 0; l < dk; ++l) v[static_cast<Index>(base + off[l])] = out[l];
  }
}

// Local index of global basis state b restricted to `sites`.
std::uint64_t extract(std::uint64_t b, const std::vector<int>& sites) {
  std::uint64_t l = 0;
  for (std::size_t m = 0; m < sites.size(); ++m) l |= ((b >> sites[m]) & 1u) << m;
  return l;
}

// Embeds terms (whose supports lie inside `sites`) into a 2^|sites| matrix.
MatrixXcd embed_terms(const std::vector<const HamiltonianTerm*>& terms, const std::vector<int>& sites) {
  const std::uint64_t n = dim_of(static_cast<int>(sites.size()));
  MatrixXcd H = MatrixXcd::Zero(static_cast<Index>(n), static_cast<Index>(n));
  for (const HamiltonianTerm* t : terms) {
    std::vector<int> pos;
    for (Site s : t->support) {
      auto it = std::lower_bound(sites.begin(), sites.end(), s);
      if (it == sites.end() || *it != s) throw std::logic_error("term outside component");
      pos.push_back(static_cast<int>(it - sites.begin()));
    }
    const auto off = local_offsets(pos);
    const std::uint64_t mask = off.back();
    const Index dk = static_cast<Index>(off.size());
    for (std::uint64_t base = 0; base < n; ++base) {
      if (base & mask) continue;
      for (Index a = 0; a < dk; ++a)
        for (Index b = 0; b < dk; ++b) {
          const cplx v = t->matrix(a, b);
          if (v != cplx(0)) H(static_cast<Index>(base + off[a]), static_cast<Index>(base + off[b])) += v;
        }
    }
  }
  return H;
}

struct Component {
  std::vector<int> sites;
  bool diagonal = false;
  VectorXd evals;  // eigenvalues, or the diagonal when `diagonal`
  MatrixXcd evecs;

  MatrixXcd unitary(double dt) const {
    if (diagonal) {
      VectorXcd d = (evals.cast<cplx>() * cplx(0, -dt)).array().exp();
      return d.asDiagonal();
    }
    VectorXcd ph = (evals.cast<cplx>() * cplx(0, -dt)).array().exp();
    return evecs * ph.asDiagonal() * evecs.adjoint();
  }
};

std::vector<Component> build_components(const Segment& seg, int num_sites) {
  // Union-find over sites touched by the terms.
  std::vector<int> parent(num_sites);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int a) {
    while (parent[a] != a) a = parent[a] = parent[parent[a]];
    return a;
  };
  std::vector<bool> used(num_sites, false);
  for (const auto& t : seg.terms) {
    const auto& s = t.support.sites();
    for (Site x : s) {
      if (x < 0 || x >= num_sites) throw std::out_of_range("term support outside schedule sites");
      used[x] = true;
    }
    for (std::size_t m = 1; m < s.size(); ++m) parent[find(s[m])] = find(s[0]);
  }
  std::map<int, std::vector<const HamiltonianTerm*>> groups;
  std::map<int, std::vector<int>> group_sites;
  for (const auto& t : seg.terms)
    if (!t.support.empty()) groups[find(t.support.sites()[0])].push_back(&t);
  for (int s = 0; s < num_sites; ++s)
    if (used[s]) group_sites[find(s)].push_back(s);

  std::vector<Component> comps;
  for (auto& [root, terms] : groups) {
    Component c;
    c.sites = group_sites[root];
    if (static_cast<int>(c.sites.size()) > kMaxComponentSites)
      throw std::length_error("segment component spans " + std::to_string(c.sites.size()) +
                              " sites, above the exact-exponential cap");
    MatrixXcd H = embed_terms(terms, c.sites);
    MatrixXcd off = H;
    off.diagonal().setZero();
    if (off.cwiseAbs().maxCoeff() == 0.0) {
      c.diagonal = true;
      c.evals = H.diagonal().real();
    } else {
      Eigen::SelfAdjointEigenSolver<MatrixXcd> es(H);
      c.evals = es.eigenvalues();
      c.evecs = es.eigenvectors();
    }
    comps.push_back(std::move(c));
  }
  return comps;
}

void apply_diagonal_rows(MatrixXcd& M, const std::vector<int>& sites, const VectorXcd& d) {
  for (Index b = 0; b < M.rows(); ++b) M.row(b) *= d[static_cast<Index>(extract(b, sites))];
}

void apply_diagonal_cols(MatrixXcd& M, const std::vector<int>& sites, const VectorXcd& d) {
  for (Index b = 0; b < M.cols(); ++b) M.col(b) *= d[static_cast<Index>(extract(b, sites))];
}

// Pauli propagation of one segment made of commuting Pauli generators.
struct PauliGenerator {
  PauliString p;
  double h;
};

bool commuting_pauli_generators(const Segment& seg, int num_sites, std::vector<PauliGenerator>& out) {
  out.clear();
  for (const auto& t : seg.terms) {
    PauliSum ps = t.pauli_form(num_sites);
    for (const auto& [p, c] : ps.terms()) {
      if (p.is_identity()) continue;
      if (std::abs(c.imag()) > 1e-12) return false;
      out.push_back({p, c.real()});
    }
  }
  for (std::size_t a = 0; a < out.size(); ++a)
    for (std::size_t b = a + 1; b < out.size(); ++b)
      if (anticommute(out[a].p, out[b].p)) return false;
  return true;
}

void propagate_pauli(PauliSum& op, const std::vector<PauliGenerator>& gens, double dt) {
  // e^{i h dt P} Q e^{-i h dt P} = cos(2h dt) Q + i sin(2h dt) P Q when {P,Q} = 0.
  for (const auto& g : gens) {
    const double c = std::cos(2.0 * g.h * dt), s = std::sin(2.0 * g.h * dt);
    PauliSum next(op.num_sites());
    for (const auto& [q, coeff] : op.terms()) {
      if (!anticommute(g.p, q)) {
        next.add(q, coeff);
        continue;
      }
      next.add(q, c * coeff);
      auto [ph, r] = multiply(g.p, q);
      next.add(r, kI * s * ph * coeff);
    }
    next.prune(1e-15);
    op = std::move(next);
  }
}

// Matrix of a Pauli sum restricted to the sites in `mask`, relabelled compactly.
PauliSum compress_support(const PauliSum& p, std::uint64_t mask) {
  std::vector<int> sites;
  for (int s = 0; s < kMaxPauliSites; ++s)
    if ((mask >> s) & 1u) sites.push_back(s);
  PauliSum out(static_cast<int>(sites.size()));
  for (const auto& [q, c] : p.terms()) {
    PauliString r;
    for (std::size_t m = 0; m < sites.size(); ++m) {
      r.x |= ((q.x >> sites[m]) & 1u) << m;
      r.z |= ((q.z >> sites[m]) & 1u) << m;
    }
    out.add(r, c);
  }
  return out;
}

void pauli_matvec(const PauliSum& p, const VectorXcd& in, VectorXcd& out) {
  out.setZero(in.size());
  for (const auto& [q, c] : p.terms()) {
    const cplx base = c * y_phase(q);
    for (Index b = 0; b < in.size(); ++b) {
      const double sgn = (std::popcount(q.z & static_cast<std::uint64_t>(b)) & 1) ? -1.0 : 1.0;
      out[static_cast<Index>(static_cast<std::uint64_t>(b) ^ q.x)] += base * sgn * in[b];
    }
  }
}

double dense_norm(const MatrixXcd& m) {
  if (m.rows() != m.cols()) throw std::invalid_argument("operator_norm needs a square matrix");
  if (m.size() == 0) return 0.0;
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  if ((m - m.adjoint()).cwiseAbs().maxCoeff() <= kHermitianTol * scale) {
    Eigen::SelfAdjointEigenSolver<MatrixXcd> es(m, Eigen::EigenvaluesOnly);
    return es.eigenvalues().cwiseAbs().maxCoeff();
  }
  if ((m + m.adjoint()).cwiseAbs().maxCoeff() <= kHermitianTol * scale) {
    MatrixXcd h = kI * m;
    Eigen::SelfAdjointEigenSolver<MatrixXcd> es(h, Eigen::EigenvaluesOnly);
    return es.eigenvalues().cwiseAbs().maxCoeff();
  }
  Eigen::BDCSVD<MatrixXcd> svd(m);
  return svd.singularValues()(0);
}

}  // namespace

// ---------------------------------------------------------------------------
// SpinState

SpinState::SpinState(int num_sites, VectorXcd amplitudes) : num_sites_(num_sites), amps_(std::move(amplitudes)) {
  if (num_sites < 0 || num_sites > kMaxStateSites) throw std::length_error("state size outside cap");
  if (static_cast<std::uint64_t>(amps_.size()) != dim_of(num_sites))
    throw std::invalid_argument("amplitude vector length must be 2^L");
}

SpinState SpinState::basis(int num_sites, std::uint64_t index) {
  if (num_sites < 0 || num_sites > kMaxStateSites) throw std::length_error("state size outside cap");
  if (index >= dim_of(num_sites)) throw std::out_of_range("basis index out of range");
  VectorXcd v = VectorXcd::Zero(static_cast<Index>(dim_of(num_sites)));
  v[static_cast<Index>(index)] = 1.0;
  return SpinState(num_sites, std::move(v));
}

// ---------------------------------------------------------------------------
// OperatorState

OperatorState OperatorState::from_dense(int num_sites, MatrixXcd m) {
  check_dense_size(num_sites);
  if (m.rows() != m.cols()) throw std::invalid_argument("operator matrix must be square");
  if (static_cast<std::uint64_t>(m.rows()) != dim_of(num_sites))
    throw std::invalid_argument("operator matrix must be 2^L x 2^L");
  OperatorState o;
  o.num_sites_ = num_sites;
  o.rep_ = std::move(m);
  return o;
}

OperatorState OperatorState::from_pauli(PauliSum p) {
  OperatorState o;
  o.num_sites_ = p.num_sites();
  p.prune(1e-15);
  o.rep_ = std::move(p);
  return o;
}

OperatorState OperatorState::identity(int num_sites) {
  PauliSum p(num_sites);
  p.add(PauliString{}, 1.0);
  return from_pauli(std::move(p));
}

OperatorState OperatorState::zero(int num_sites) { return from_pauli(PauliSum(num_sites)); }

OperatorState OperatorState::pauli(int num_sites, std::string_view label, cplx coeff) {
  if (static_cast<int>(label.size()) > num_sites) throw std::invalid_argument("label longer than L");
  PauliSum p(num_sites);
  p.add(PauliString::from_label(label), coeff);
  return from_pauli(std::move(p));
}

OperatorState OperatorState::single(int num_sites, int site, char op, cplx coeff) {
  if (site < 0 || site >= num_sites) throw std::out_of_range("site out of range");
  PauliSum p(num_sites);
  p.add(PauliString::single(site, op), coeff);
  return from_pauli(std::move(p));
}

MatrixXcd OperatorState::to_dense() const {
  if (is_dense()) return dense_ref();
  check_dense_size(num_sites_);
  return pauli_to_dense(pauli_ref());
}

PauliSum OperatorState::to_pauli() const {
  if (is_pauli()) return pauli_ref();
  return dense_to_pauli(dense_ref(), num_sites_);
}

bool OperatorState::is_hermitian(double tol) const {
  if (is_pauli()) {
    for (const auto& [p, c] : pauli_ref().terms())
      if (std::abs(c.imag()) > tol) return false;
    return true;
  }
  const auto& m = dense_ref();
  return m.size() == 0 || (m - m.adjoint()).cwiseAbs().maxCoeff() <= tol;
}

OperatorState operator+(const OperatorState& a, const OperatorState& b) {
  require_same_size(a, b);
  if (a.is_pauli() && b.is_pauli()) {
    PauliSum s = a.pauli_ref();
    s += b.pauli_ref();
    return OperatorState::from_pauli(std::move(s));
  }
  return OperatorState::from_dense(a.num_sites(), a.to_dense() + b.to_dense());
}

OperatorState operator-(const OperatorState& a, const OperatorState& b) { return a + cplx(-1.0) * b; }

OperatorState operator*(const OperatorState& a, const OperatorState& b) {
  require_same_size(a, b);
  if (a.is_pauli() && b.is_pauli()) return OperatorState::from_pauli(a.pauli_ref() * b.pauli_ref());
  return OperatorState::from_dense(a.num_sites(), a.to_dense() * b.to_dense());
}

OperatorState operator*(cplx s, const OperatorState& a) {
  if (a.is_pauli()) {
    PauliSum p = a.pauli_ref();
    p *= s;
    return OperatorState::from_pauli(std::move(p));
  }
  return OperatorState::from_dense(a.num_sites(), s * a.dense_ref());
}

PauliSum dense_to_pauli(const MatrixXcd& m, int num_sites, double tol) {
  const std::uint64_t n = dim_of(num_sites);
  if (static_cast<std::uint64_t>(m.rows()) != n || m.rows() != m.cols())
    throw std::invalid_argument("matrix size does not match 2^L");
  PauliSum out(num_sites);
  VectorXcd v(static_cast<Index>(n));
  for (std::uint64_t x = 0; x < n; ++x) {
    for (std::uint64_t b = 0; b < n; ++b) v[static_cast<Index>(b)] = m(static_cast<Index>(b ^ x), static_cast<Index>(b));
    walsh_hadamard(v);
    for (std::uint64_t z = 0; z < n; ++z) {
      PauliString p{x, z};
      cplx c = std::conj(y_phase(p)) * v[static_cast<Index>(z)] / static_cast<double>(n);
      if (std::abs(c) > tol) out.add(p, c);
    }
  }
  return out;
}

MatrixXcd pauli_to_dense(const PauliSum& p) {
  check_dense_size(p.num_sites());
  const std::uint64_t n = dim_of(p.num_sites());
  MatrixXcd m = MatrixXcd::Zero(static_cast<Index>(n), static_cast<Index>(n));
  for (const auto& [q, c] : p.terms()) {
    const cplx base = c * y_phase(q);
    for (std::uint64_t b = 0; b < n; ++b) {
      const double sgn = (std::popcount(q.z & b) & 1) ? -1.0 : 1.0;
      m(static_cast<Index>(b ^ q.x), static_cast<Index>(b)) += base * sgn;
    }
  }
  return m;
}

// ---------------------------------------------------------------------------
// Terms and schedules

HamiltonianTerm HamiltonianTerm::from_pauli(std::string_view ops, const std::vector<Site>& sites, double coeff) {
  if (ops.size() != sites.size()) throw std::invalid_argument("Pauli ops and sites differ in length");
  std::vector<std::pair<Site, char>> pairs;
  for (std::size_t m = 0; m < sites.size(); ++m) pairs.emplace_back(sites[m], ops[m]);
  std::sort(pairs.begin(), pairs.end());
  for (std::size_t m = 1; m < pairs.size(); ++m)
    if (pairs[m].first == pairs[m - 1].first) throw std::invalid_argument("repeated site in term");
  std::string label;
  std::vector<Site> sorted;
  for (auto& [s, o] : pairs) {
    sorted.push_back(s);
    label.push_back(o);
  }
  PauliSum local(static_cast<int>(label.size()));
  local.add(PauliString::from_label(label), coeff);
  HamiltonianTerm t;
  t.support = Region(sorted);
  t.matrix = pauli_to_dense(local);
  return t;
}

HamiltonianTerm HamiltonianTerm::from_matrix(const std::vector<Site>& sites, const MatrixXcd& m) {
  if (!std::is_sorted(sites.begin(), sites.end()) ||
      std::adjacent_find(sites.begin(), sites.end()) != sites.end())
    throw std::invalid_argument("term sites must be strictly increasing");
  if (static_cast<std::uint64_t>(m.rows()) != dim_of(static_cast<int>(sites.size())) || m.rows() != m.cols())
    throw std::invalid_argument("term matrix must be 2^k x 2^k");
  if ((m - m.adjoint()).cwiseAbs().maxCoeff() > kHermitianTol * std::max(1.0, m.cwiseAbs().maxCoeff()))
    throw std::invalid_argument("term matrix must be Hermitian");
  HamiltonianTerm t;
  t.support = Region(sites);
  t.matrix = m;
  return t;
}

PauliSum HamiltonianTerm::pauli_form(int num_sites) const {
  const auto& s = support.sites();
  PauliSum local = dense_to_pauli(matrix, static_cast<int>(s.size()));
  PauliSum out(num_sites);
  for (const auto& [q, c] : local.terms()) {
    PauliString g;
    for (std::size_t m = 0; m < s.size(); ++m) {
      g.x |= ((q.x >> m) & 1u) << s[m];
      g.z |= ((q.z >> m) & 1u) << s[m];
    }
    out.add(g, c);
  }
  return out;
}

double HamiltonianTerm::norm() const { return dense_norm(matrix); }

double Schedule::total_duration() const {
  double t = 0.0;
  for (const auto& s : segments) t += s.duration;
  return t;
}

void Schedule::append(Segment seg) {
  if (!(seg.duration > 0.0) || !std::isfinite(seg.duration))
    throw std::invalid_argument("segment duration must be positive and finite");
  segments.push_back(std::move(seg));
}

void Schedule::append(const Schedule& other) {
  if (other.num_sites != num_sites) throw std::invalid_argument("schedule size mismatch");
  for (const auto& s : other.segments) append(s);
}

Schedule Schedule::inverse() const {
  Schedule out{num_sites, {}};
  for (auto it = segments.rbegin(); it != segments.rend(); ++it) {
    Segment s = *it;
    for (auto& t : s.terms) t.matrix = -t.matrix;
    out.segments.push_back(std::move(s));
  }
  return out;
}

Schedule Schedule::slice(double t0, double t1) const {
  if (t0 < 0 || t1 < t0) throw std::invalid_argument("slice needs 0 <= t0 <= t1");
  Schedule out{num_sites, {}};
  double start = 0.0;
  for (const auto& s : segments) {
    const double end = start + s.duration;
    const double a = std::max(start, t0), b = std::min(end, t1);
    if (b > a) {
      Segment piece = s;
      piece.duration = b - a;
      out.segments.push_back(std::move(piece));
    }
    start = end;
  }
  return out;
}

void Schedule::validate() const {
  if (num_sites < 1) throw std::invalid_argument("schedule needs at least one site");
  for (const auto& s : segments) {
    if (!(s.duration > 0.0) || !std::isfinite(s.duration))
      throw std::invalid_argument("segment duration must be positive and finite");
    for (const auto& t : s.terms)
      for (Site x : t.support)
        if (x < 0 || x >= num_sites) throw std::out_of_range("term support outside schedule sites");
  }
}

MatrixXcd dense_hamiltonian(const std::vector<HamiltonianTerm>& terms, int num_sites) {
  check_dense_size(num_sites);
  std::vector<int> all(num_sites);
  std::iota(all.begin(), all.end(), 0);
  std::vector<const HamiltonianTerm*> ptrs;
  for (const auto& t : terms) ptrs.push_back(&t);
  return embed_terms(ptrs, all);
}

// ---------------------------------------------------------------------------
// Evolver

struct Evolver::Impl {
  Schedule schedule;
  std::vector<double> starts;
  std::vector<std::vector<Component>> comps;
  std::vector<bool> built;

  const std::vector<Component>& components(std::size_t k) {
    if (!built[k]) {
      comps[k] = build_components(schedule.segments[k], schedule.num_sites);
      built[k] = true;
    }
    return comps[k];
  }

  template <class F>
  void for_pieces(double t0, double t1, F&& f) {
    if (t0 < 0 || t1 < t0) throw std::invalid_argument("evolution interval must satisfy 0 <= t0 <= t1");
    for (std::size_t k = 0; k < schedule.segments.size(); ++k) {
      const double a = std::max(starts[k], t0);
      const double b = std::min(starts[k] + schedule.segments[k].duration, t1);
      if (b > a) f(components(k), b - a);
    }
  }
};

Evolver::Evolver(const Schedule& schedule) : impl_(std::make_unique<Impl>()) {
  schedule.validate();
  impl_->schedule = schedule;
  double t = 0.0;
  for (const auto& s : schedule.segments) {
    impl_->starts.push_back(t);
    t += s.duration;
  }
  impl_->comps.resize(schedule.segments.size());
  impl_->built.assign(schedule.segments.size(), false);
}

Evolver::~Evolver() = default;
Evolver::Evolver(Evolver&&) noexcept = default;
Evolver& Evolver::operator=(Evolver&&) noexcept = default;

void Evolver::evolve_state(VectorXcd& psi, double t0, double t1) {
  if (static_cast<std::uint64_t>(psi.size()) != dim_of(impl_->schedule.num_sites))
    throw std::invalid_argument("state dimension does not match schedule");
  impl_->for_pieces(t0, t1, [&](const std::vector<Component>& comps, double dt) {
    for (const auto& c : comps) {
      if (c.diagonal) {
        VectorXcd d = (c.evals.cast<cplx>() * cplx(0, -dt)).array().exp();
        for (Index b = 0; b < psi.size(); ++b) psi[b] *= d[static_cast<Index>(extract(b, c.sites))];
      } else {
        apply_gate_vector(psi, c.sites, c.unitary(dt));
      }
    }
  });
}

void Evolver::evolve_dense_operator(MatrixXcd& op, double t0, double t1) {
  if (static_cast<std::uint64_t>(op.rows()) != dim_of(impl_->schedule.num_sites))
    throw std::invalid_argument("operator dimension does not match schedule");
  impl_->for_pieces(t0, t1, [&](const std::vector<Component>& comps, double dt) {
    for (const auto& c : comps) {
      if (c.diagonal) {
        VectorXcd d = (c.evals.cast<cplx>() * cplx(0, -dt)).array().exp();
        apply_diagonal_rows(op, c.sites, d.conjugate());
        apply_diagonal_cols(op, c.sites, d);
      } else {
        MatrixXcd U = c.unitary(dt);
        apply_gate_rows(op, c.sites, U.adjoint());
        op.transposeInPlace();
        apply_gate_rows(op, c.sites, U.transpose());
        op.transposeInPlace();
      }
    }
  });
}

SpinState evolve_state(const SpinState& psi, const Schedule& schedule) {
  if (psi.num_sites() != schedule.num_sites) throw std::invalid_argument("state/schedule size mismatch");
  Evolver ev(schedule);
  VectorXcd v = psi.amplitudes();
  ev.evolve_state(v, 0.0, schedule.total_duration());
  return SpinState(psi.num_sites(), std::move(v));
}

OperatorState evolve_operator(const OperatorState& op, const Schedule& schedule) {
  if (op.num_sites() != schedule.num_sites) throw std::invalid_argument("operator/schedule size mismatch");
  schedule.validate();
  std::size_t k = 0;
  OperatorState cur = op;
  if (op.is_pauli()) {
    PauliSum p = op.pauli_ref();
    std::vector<PauliGenerator> gens;
    for (; k < schedule.segments.size(); ++k) {
      if (!commuting_pauli_generators(schedule.segments[k], schedule.num_sites, gens)) break;
      propagate_pauli(p, gens, schedule.segments[k].duration);
    }
    cur = OperatorState::from_pauli(std::move(p));
    if (k == schedule.segments.size()) return cur;
  }
  Schedule rest{schedule.num_sites, {schedule.segments.begin() + static_cast<long>(k), schedule.segments.end()}};
  MatrixXcd m = cur.to_dense();
  Evolver ev(rest);
  ev.evolve_dense_operator(m, 0.0, rest.total_duration());
  return OperatorState::from_dense(op.num_sites(), std::move(m));
}

// ---------------------------------------------------------------------------
// Norms, commutators, projectors

double lanczos_spectral_radius(const std::function<void(const VectorXcd&, VectorXcd&)>& apply, Index dim,
                               double tol, int max_iter) {
  if (dim <= 0) return 0.0;
  std::mt19937_64 rng(12345);
  std::normal_distribution<double> g;
  VectorXcd v(dim), w(dim), v_prev = VectorXcd::Zero(dim);
  for (Index i = 0; i < dim; ++i) v[i] = cplx(g(rng), g(rng));
  v.normalize();
  std::vector<double> alpha, beta;
  double prev = -1.0, rho = 0.0;
  for (int j = 0; j < max_iter && j < dim; ++j) {
    apply(v, w);
    const double a = v.dot(w).real();
    w -= a * v;
    if (j > 0) w -= beta.back() * v_prev;
    alpha.push_back(a);
    const double b = w.norm();
    const bool exhausted = b < 1e-13;
    if (j % 5 == 4 || exhausted || j + 1 == max_iter || j + 1 == dim) {
      const Index n = static_cast<Index>(alpha.size());
      VectorXd diag = Eigen::Map<VectorXd>(alpha.data(), n);
      VectorXd sub = n > 1 ? VectorXd(Eigen::Map<VectorXd>(beta.data(), n - 1)) : VectorXd();
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
      es.computeFromTridiagonal(diag, sub, Eigen::EigenvaluesOnly);
      rho = es.eigenvalues().cwiseAbs().maxCoeff();
      if (exhausted || (prev >= 0 && std::abs(rho - prev) <= tol * std::max(1.0, rho))) return rho;
      prev = rho;
    }
    if (exhausted) break;
    beta.push_back(b);
    v_prev = v;
    v = w / b;
  }
  return rho;
}

double operator_norm(const OperatorState& op) {
  if (op.is_dense()) return dense_norm(op.dense_ref());
  const PauliSum& p = op.pauli_ref();
  if (p.empty()) return 0.0;
  std::uint64_t mask = 0;
  for (const auto& [q, c] : p.terms()) mask |= q.support_mask();
  PauliSum compact = compress_support(p, mask);
  const int k = compact.num_sites();
  if (k <= kMaxDenseOperatorSites) return dense_norm(pauli_to_dense(compact));
  if (k > kMaxStateSites) throw std::length_error("operator support too large for iterative norm");
  bool herm = true, anti = true;
  for (const auto& [q, c] : compact.terms()) {
    herm = herm && std::abs(c.imag()) <= kHermitianTol;
    anti = anti && std::abs(c.real()) <= kHermitianTol;
  }
  const Index dim = static_cast<Index>(dim_of(k));
  if (herm || anti) {
    return lanczos_spectral_radius([&](const VectorXcd& in, VectorXcd& out) { pauli_matvec(compact, in, out); },
                                   dim);
  }
  VectorXcd tmp;
  PauliSum adj(k);
  for (const auto& [q, c] : compact.terms()) adj.add(q, std::conj(c));
  const double lam = lanczos_spectral_radius(
      [&](const VectorXcd& in, VectorXcd& out) {
        pauli_matvec(compact, in, tmp);
        pauli_matvec(adj, tmp, out);
      },
      dim);
  return std::sqrt(lam);
}

double frobenius_norm(const OperatorState& op) {
  if (op.is_dense()) {
    const auto& m = op.dense_ref();
    return std::sqrt(m.squaredNorm() / static_cast<double>(m.rows()));
  }
  double s = 0.0;
  for (const auto& [q, c] : op.pauli_ref().terms()) s += std::norm(c);
  return std::sqrt(s);
}

cplx inner(const OperatorState& a, const OperatorState& b) {
  require_same_size(a, b);
  if (a.is_pauli() && b.is_pauli()) {
    cplx s = 0.0;
    for (const auto& [q, c] : a.pauli_ref().terms()) s += std::conj(c) * b.pauli_ref().coefficient(q);
    return s;
  }
  const MatrixXcd ma = a.to_dense(), mb = b.to_dense();
  return (ma.adjoint() * mb).trace() / static_cast<double>(ma.rows());
}

OperatorState commutator(const OperatorState& a, const OperatorState& b) {
  require_same_size(a, b);
  if (a.is_pauli() && b.is_pauli()) {
    PauliSum out(a.num_sites());
    for (const auto& [pa, ca] : a.pauli_ref().terms())
      for (const auto& [pb, cb] : b.pauli_ref().terms()) {
        if (!anticommute(pa, pb)) continue;
        auto [ph, r] = multiply(pa, pb);
        out.add(r, 2.0 * ph * ca * cb);
      }
    out.prune(1e-15);
    return OperatorState::from_pauli(std::move(out));
  }
  const MatrixXcd ma = a.to_dense(), mb = b.to_dense();
  return OperatorState::from_dense(a.num_sites(), ma * mb - mb * ma);
}

namespace {

template <class Keep>
OperatorState filter_strings(const OperatorState& op, Keep keep) {
  PauliSum in = op.to_pauli();
  PauliSum out(op.num_sites());
  for (const auto& [q, c] : in.terms())
    if (keep(q)) out.add(q, c);
  if (op.is_dense()) return OperatorState::from_dense(op.num_sites(), pauli_to_dense(out));
  return OperatorState::from_pauli(std::move(out));
}

void require_normalized(const OperatorState& op) {
  const double n = frobenius_norm(op);
  if (std::abs(n - 1.0) > kNormTol)
    throw std::invalid_argument("operator must be normalized, (op|op) = " + std::to_string(n * n));
}

}  // namespace

OperatorState project_PX(const OperatorState& op, const Region& X) {
  if (X.empty()) throw std::invalid_argument("project_PX needs a nonempty region");
  for (Site s : X)
    if (s < 0 || s >= op.num_sites()) throw std::out_of_range("region site outside operator");
  const std::uint64_t mask = region_mask(X);
  return filter_strings(op, [mask](PauliString q) { return (q.support_mask() & mask) != 0; });
}

OperatorState project_Qx(const OperatorState& op, Site x) {
  if (x < 0 || x >= op.num_sites()) throw std::out_of_range("project_Qx site out of range");
  return filter_strings(op, [x](PauliString q) { return q.rightmost_site() == x; });
}

std::vector<double> right_weight_distribution(const OperatorState& op) {
  require_normalized(op);
  std::vector<double> w(op.num_sites() + 1, 0.0);
  const PauliSum p = op.to_pauli();
  for (const auto& [q, c] : p.terms()) {
    const int r = q.rightmost_site();
    w[r < 0 ? op.num_sites() : r] += std::norm(c);
  }
  return w;
}

double otoc_weight(const OperatorState& op0, const Schedule& schedule, Site x) {
  require_normalized(op0);
  if (x < 0 || x >= op0.num_sites()) throw std::out_of_range("otoc site out of range");
  OperatorState o = evolve_operator(op0, schedule);
  double w = 0.0;
  const PauliSum p = o.to_pauli();
  for (const auto& [q, c] : p.terms())
    if (q.acts_on(x)) w += std::norm(c);
  return w;
}

GroundStateCorrelation ground_state_correlator(const std::vector<HamiltonianTerm>& H, int num_sites,
                                               const OperatorState& A, const OperatorState& B) {
  if (A.num_sites() != num_sites || B.num_sites() != num_sites)
    throw std::invalid_argument("observable size mismatch");
  MatrixXcd h = dense_hamiltonian(H, num_sites);
  Eigen::SelfAdjointEigenSolver<MatrixXcd> es(h);
  const VectorXd& e = es.eigenvalues();
  GroundStateCorrelation out;
  out.ground_energy = e[0];
  out.gap = e.size() > 1 ? e[1] - e[0] : std::numeric_limits<double>::infinity();
  if (out.gap <= 1e-10) throw std::domain_error("ground state is degenerate (gap <= 1e-10)");
  const VectorXcd psi = es.eigenvectors().col(0);
  const MatrixXcd a = A.to_dense(), b = B.to_dense();
  const VectorXcd bpsi = b * psi;
  const cplx ab = psi.dot(a * bpsi);
  const cplx ea = psi.dot(a * psi), eb = psi.dot(bpsi);
  out.correlator = (ab - ea * eb).real();
  return out;
}

EnvelopeReport validate_envelope(const Schedule& schedule, const LatticeGraph& lattice,
                                 const PowerLawEnvelope& envelope) {
  if (schedule.num_sites != lattice.num_sites()) throw std::invalid_argument("schedule/lattice size mismatch");
  EnvelopeReport rep;
  for (std::size_t k = 0; k < schedule.segments.size(); ++k) {
    std::map<std::pair<Site, Site>, double> pair_sum;
    for (const auto& t : schedule.segments[k].terms) {
      const auto& s = t.support.sites();
      if (s.size() < 2) continue;
      const double n = t.norm();
      for (std::size_t a = 0; a < s.size(); ++a)
        for (std::size_t b = a + 1; b < s.size(); ++b) pair_sum[{s[a], s[b]}] += n;
    }
    for (const auto& [ij, v] : pair_sum) {
      const double lim = envelope(lattice, ij.first, ij.second);
      const double ratio = v / lim;
      if (ratio > rep.ratio) {
        rep.ratio = ratio;
        rep.segment = static_cast<int>(k);
        rep.i = ij.first;
        rep.j = ij.second;
        rep.value = v;
        rep.limit = lim;
      }
    }
  }
  rep.ok = rep.ratio <= 1.0 + 1e-12;
  return rep;
}

}  // namespace lightcone::spin
