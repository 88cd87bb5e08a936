#ifndef SETREACH_LINREACH_DETAIL_HPP_
#define SETREACH_LINREACH_DETAIL_HPP_

#include "setreach/linreach.hpp"

namespace setreach::detail
{

HPolytope push_facets(const HPolytope& P, const std::optional<SetRep>& U, const Matrix& Ainv);
HPolytope template_step(const SetRep& P, const std::optional<SetRep>& U, const Matrix& A, const Template& T);

// Steps reach() may take: the horizon, or the fixpoint guard.
std::size_t iteration_limit(const LinearSystem& sys, const ReachConfig& cfg);

// e^x - 1 - x without cancellation for small x.
double exp_remainder(double x);

// max |x_i| over the set.
double inf_norm_bound(const SetRep& s);

} // namespace setreach::detail

#endif
