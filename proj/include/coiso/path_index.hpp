#pragma once

#include <optional>
#include <vector>

#include "coiso/symplectic.hpp"

namespace coiso {

struct Crossing {
  double t = 0.0;
  int signature = 0;  // signature of the crossing form on ker(M(t) - I)
};

struct IndexResult {
  double mean_index = 0.0;
  std::optional<int> cz;
  bool degenerate_endpoint = false;
  std::vector<Crossing> crossings;
};

/// Mean index: the lifted spectral angle divided by pi. Positive for flows of
/// negative definite Hamiltonians.
double mean_index(const SymplecticPath& path, const Tolerances& tol = {});

/// Conley-Zehnder index, normalized so that the short flow of a negative
/// definite Hamiltonian on R^{2n} has index n.
int conley_zehnder(const SymplecticPath& path, const Tolerances& tol = {},
                   std::vector<Crossing>* crossings = nullptr);

/// True when the endpoint has an eigenvalue within cross_tol of 1.
bool degenerate_endpoint(const SymplecticPath& path, const Tolerances& tol = {});

IndexResult index_report(const SymplecticPath& path, const Tolerances& tol = {});

/// max_{k <= k_max} |mean_index(path^k) - k mean_index(path)|
double homogeneity_check(const SymplecticPath& path, int k_max, const Tolerances& tol = {});

}  // namespace coiso
