#pragma once

#include <complex>
#include <compare>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <utility>

namespace lightcone::spin {

using cplx = std::complex<double>;

inline constexpr int kMaxPauliSites = 64;

// Tensor product of single-site Paulis. Bit i of (x, z) describes site i:
// (0,0)=I, (1,0)=X, (0,1)=Z, (1,1)=Y, so the string equals i^{|x&z|} X^x Z^z.
struct PauliString {
  std::uint64_t x = 0;
  std::uint64_t z = 0;

  // Character i of the label acts on site i.
  static PauliString from_label(std::string_view label);
  static PauliString single(int site, char op);

  std::string label(int num_sites) const;
  char op_at(int site) const;
  std::uint64_t support_mask() const { return x | z; }
  bool is_identity() const { return (x | z) == 0; }
  bool acts_on(int site) const { return (support_mask() >> site) & 1u; }
  // Index of the right-most non-identity site, or -1 for the identity.
  int rightmost_site() const;
  int weight() const;

  auto operator<=>(const PauliString&) const = default;
};

bool anticommute(PauliString a, PauliString b);

// a * b = phase * c with phase in {1, i, -1, -i}.
std::pair<cplx, PauliString> multiply(PauliString a, PauliString b);

// i^{|x & z|}, the phase relating the string to X^x Z^z.
cplx y_phase(PauliString p);

// Weighted sum of Pauli strings on a fixed number of sites.
class PauliSum {
 public:
  using Map = std::map<PauliString, cplx>;

  PauliSum() = default;
  explicit PauliSum(int num_sites);

  int num_sites() const { return num_sites_; }
  const Map& terms() const { return terms_; }
  std::size_t size() const { return terms_.size(); }
  bool empty() const { return terms_.empty(); }

  void add(PauliString p, cplx c);
  cplx coefficient(PauliString p) const;
  // Drops entries with |c| <= tol.
  void prune(double tol = 1e-14);

  PauliSum& operator+=(const PauliSum& other);
  PauliSum& operator*=(cplx s);

 private:
  int num_sites_ = 0;
  Map terms_;
};

PauliSum operator*(const PauliSum& a, const PauliSum& b);

}  // namespace lightcone::spin
