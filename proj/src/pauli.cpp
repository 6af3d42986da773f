#include "lightcone/pauli.hpp"

#include <bit>
#include <stdexcept>

namespace lightcone::spin {

namespace {

const cplx kIPow[4] = {cplx(1, 0), cplx(0, 1), cplx(-1, 0), cplx(0, -1)};

void check_site(int site) {
  if (site < 0 || site >= kMaxPauliSites) throw std::out_of_range("Pauli site out of range");
}

}  // namespace

PauliString PauliString::from_label(std::string_view label) {
  if (label.size() > static_cast<std::size_t>(kMaxPauliSites))
    throw std::invalid_argument("Pauli label longer than 64 sites");
  PauliString p;
  for (std::size_t i = 0; i < label.size(); ++i) {
    if (label[i] == 'I') continue;
    PauliString s = single(static_cast<int>(i), label[i]);
    p.x |= s.x;
    p.z |= s.z;
  }
  return p;
}

PauliString PauliString::single(int site, char op) {
  check_site(site);
  const std::uint64_t bit = std::uint64_t{1} << site;
  switch (op) {
    case 'I': return {};
    case 'X': return {bit, 0};
    case 'Y': return {bit, bit};
    case 'Z': return {0, bit};
    default: throw std::invalid_argument(std::string("unknown Pauli symbol '") + op + "'");
  }
}

char PauliString::op_at(int site) const {
  check_site(site);
  const bool bx = (x >> site) & 1u, bz = (z >> site) & 1u;
  if (bx && bz) return 'Y';
  if (bx) return 'X';
  if (bz) return 'Z';
  return 'I';
}

std::string PauliString::label(int num_sites) const {
  std::string s(num_sites, 'I');
  for (int i = 0; i < num_sites; ++i) s[i] = op_at(i);
  return s;
}

int PauliString::rightmost_site() const {
  const std::uint64_t m = support_mask();
  return m == 0 ? -1 : 63 - std::countl_zero(m);
}

int PauliString::weight() const { return std::popcount(support_mask()); }

bool anticommute(PauliString a, PauliString b) {
  return (std::popcount(a.x & b.z) + std::popcount(a.z & b.x)) & 1;
}

cplx y_phase(PauliString p) { return kIPow[std::popcount(p.x & p.z) & 3]; }

std::pair<cplx, PauliString> multiply(PauliString a, PauliString b) {
  // (X^x1 Z^z1)(X^x2 Z^z2) = (-1)^{z1.x2} X^{x1^x2} Z^{z1^z2}
  PauliString c{a.x ^ b.x, a.z ^ b.z};
  int e = std::popcount(a.x & a.z) + std::popcount(b.x & b.z) + 2 * std::popcount(a.z & b.x) -
          std::popcount(c.x & c.z);
  e = ((e % 4) + 4) % 4;
  return {kIPow[e], c};
}

PauliSum::PauliSum(int num_sites) : num_sites_(num_sites) {
  if (num_sites < 0 || num_sites > kMaxPauliSites) throw std::invalid_argument("bad site count");
}

void PauliSum::add(PauliString p, cplx c) {
  if (num_sites_ < kMaxPauliSites && (p.support_mask() >> num_sites_) != 0)
    throw std::out_of_range("Pauli string exceeds operator size");
  auto [it, inserted] = terms_.try_emplace(p, c);
  if (!inserted) it->second += c;
}

cplx PauliSum::coefficient(PauliString p) const {
  auto it = terms_.find(p);
  return it == terms_.end() ? cplx(0) : it->second;
}

void PauliSum::prune(double tol) {
  std::erase_if(terms_, [tol](const auto& kv) { return std::abs(kv.second) <= tol; });
}

PauliSum& PauliSum::operator+=(const PauliSum& other) {
  if (other.num_sites_ != num_sites_) throw std::invalid_argument("site count mismatch");
  for (const auto& [p, c] : other.terms_) add(p, c);
  return *this;
}

PauliSum& PauliSum::operator*=(cplx s) {
  for (auto& kv : terms_) kv.second *= s;
  return *this;
}

PauliSum operator*(const PauliSum& a, const PauliSum& b) {
  if (a.num_sites() != b.num_sites()) throw std::invalid_argument("site count mismatch");
  PauliSum out(a.num_sites());
  for (const auto& [pa, ca] : a.terms())
    for (const auto& [pb, cb] : b.terms()) {
      auto [ph, pc] = multiply(pa, pb);
      out.add(pc, ph * ca * cb);
    }
  return out;
}

}  // namespace lightcone::spin
