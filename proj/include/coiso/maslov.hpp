#pragma once

#include "coiso/models.hpp"
#include "coiso/path_index.hpp"

namespace coiso {

struct AssembledPath {
  SymplecticPath xi_path;        // on T F + T-perp M, dimension 2k
  SymplecticPath holonomy_path;  // on E, dimension 2(n - k)
  SymplecticPath phi;            // xi_path + holonomy_path
};

/// Frame transport Xi(t) = B(t) B(0)^{-1} with B = [xi | xi*] read in the
/// ambient coordinates of the leaf planes. A user frame xi = xi_can F enters
/// as B_can (F + F^{-T}).
SymplecticPath xi_path_from_frame(const FramedLeafLoop& loop, const CoisotropicModel& model);

AssembledPath assemble(const FramedLeafLoop& loop, const CoisotropicModel& model);

/// mu(gamma) = -mean_index(Xi + Gamma); non-orientable loops are doubled and halved.
double maslov_index(const FramedLeafLoop& loop, const CoisotropicModel& model, const Tolerances& tol = {});

/// Maslov index of the canonical closed geodesic in a class.
double maslov_index(const CoisotropicModel& model, const ClassVector& cls, const Tolerances& tol = {});

/// Recapping by a trivialization loop of Maslov number m.
double recap(double mu, int m);

/// Maslov index after twisting the capping trivialization by a rotation loop
/// of winding m in the given leaf-factor plane.
double twisted_maslov_index(const FramedLeafLoop& loop, const CoisotropicModel& model, int m, int plane = 0,
                            const Tolerances& tol = {});

/// k-fold traversal of a loop.
FramedLeafLoop iterate_loop(const FramedLeafLoop& loop, int k);

/// |mu(gamma^k) - k mu(gamma)|
double maslov_homogeneity(const FramedLeafLoop& loop, const CoisotropicModel& model, int k,
                          const Tolerances& tol = {});

}  // namespace coiso
