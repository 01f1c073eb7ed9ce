#pragma once

#include <functional>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "fred/types.hpp"

namespace fred {

enum class Kind { fekd, feld, fevd };

std::string to_string(Kind kind);
Kind kind_from_string(const std::string& name);

// Upper k bound of the update sum at horizon h. FELD and FEVD run over
// k = 0..h-1; the FEKD loses the last update because its transform already
// conditions on t+h-1, so h = 1 leaves an empty sum.
int kind_kmax(Kind kind, int h);

// What the decomposition is taken "of": a Laplace argument u, a density
// evaluation point y, or a matrix Laplace argument Γ (stored row-major).
struct TransformSpec {
  enum class Tag { laplace, density_at, matrix_laplace };
  Tag tag = Tag::laplace;
  Vec value;
  int matrix_n = 0;  // side length when tag == matrix_laplace
  std::function<bool(const Vec&)> domain;  // optional model-specific check

  static TransformSpec laplace(const Vec& u);
  static TransformSpec density_at(const Vec& y);
  static TransformSpec matrix_laplace(const Mat& gamma);
};

// Per-update terms γ(k,h) with their per-horizon totals γ(h). One table per
// (argument, state); the totals come from a direct formula, not from summing
// the terms, so the stored residuals measure a genuine identity.
struct DecompositionTable {
  Kind kind = Kind::feld;
  Vec argument;  // u, y, or vec(Γ) row-major
  Vec state;     // conditioning state, vectorized for matrix models
  int matrix_n = 0;  // side length when argument/state are matrices
  std::vector<int> horizons;
  std::map<std::pair<int, int>, double> terms;  // (h,k) -> γ(k,h)
  std::map<int, double> totals;                 // h -> γ(h)
  std::map<int, double> residuals;              // h -> γ(h) - Σ_k γ(k,h)

  double term(int h, int k) const;
  double total(int h) const;

  // CSV columns: h,k,term,total,share. Horizons with an empty update sum
  // (FEKD at h = 1) keep their total on a row with blank k/term/share.
  // The share column uses term/total with the convention 0 when the total
  // vanishes; normalized_shares() is the strict variant that refuses zero
  // totals.
  std::string to_csv() const;
  static DecompositionTable from_csv(const std::string& text, Kind kind);

  std::string to_json() const;
  static DecompositionTable from_json(const std::string& text);
};

// Validates finiteness, k-ranges, and the identity
// |γ(h) - Σ_k γ(k,h)| <= identity_tol * max(1, |γ(h)|) for every horizon.
// The default tolerance is the closed-form standard; quadrature-backed
// engines widen it to their accuracy target.
DecompositionTable assemble_table(Kind kind,
                                  const std::map<std::pair<int, int>, double>& terms,
                                  const std::map<int, double>& totals,
                                  const Vec& argument, const Vec& state,
                                  int matrix_n = 0, double identity_tol = 1e-10);

// Shares γ(k,h)/γ(h); requires every total nonzero and returns values that
// sum to 1 per horizon within 1e-12.
std::map<std::pair<int, int>, double> normalized_shares(const DecompositionTable& table);

}  // namespace fred
