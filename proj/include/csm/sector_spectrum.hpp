#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "csm/core.hpp"

namespace csm {

/// Diagonal coefficient B m_s + 2A m_s m_j.
double mu(HalfInt m_s, HalfInt m_j, const ModelParams& p);

/// Transition amplitude A sqrt((s-m_s+1)(s+m_s)(j+m_j+1)(j-m_j)) between
/// (m_s, m_j) and (m_s-1, m_j+1).
double nu(HalfInt m_s, HalfInt m_j, HalfInt s, HalfInt j, double A);

/// The Hamiltonian restricted to fixed (j, m), in descending-m_s order.
struct SectorBlock {
  SectorKey key;
  std::vector<std::pair<HalfInt, HalfInt>> basis;  // (m_s, m_j)
  Eigen::MatrixXd matrix;
  Eigen::VectorXd energies;  // ascending
  Eigen::MatrixXd weights;   // columns are eigenvectors
};

SectorBlock build_sector(const ModelParams& p, SectorKey key);

struct Level {
  HalfInt j;
  HalfInt m;
  double energy = 0.0;
  std::int64_t multiplicity = 1;
};

/// Every (j, m) sector of the model, ordered by j descending, m descending,
/// energy ascending. Each level carries the bath-spin multiplicity of j.
std::vector<Level> full_spectrum(const ModelParams& p);

/// Energies of all levels repeated by multiplicity, ascending.
std::vector<double> expand_levels(const std::vector<Level>& levels);

}  // namespace csm
