#pragma once

#include "simdm/predictor.hpp"
#include "simdm/schedule.hpp"

namespace simdm {

enum class InverterMethod { naive_ddim, first_order, second_order };

struct InverterSpec {
    InverterMethod method = InverterMethod::first_order;
    TimeGrid grid;
    const DataPredictor* predictor = nullptr;
};

// Inversion step j moves t[j] -> t[j-1] (toward larger times). The two
// one-step variants share the update formula and differ only in the time
// passed to the predictor: naive uses the target time t[j-1], first_order the
// current time t[j]. The second-order variant also needs the iterate that was
// current at t[j+1], evaluated at its own time, so it exists for j <= N-1.
VectorXd naive_inv_step(const InverterSpec& spec, const VectorXd& x, int j, long* nfe = nullptr);
VectorXd first_order_inv_step(const InverterSpec& spec, const VectorXd& x, int j,
                              long* nfe = nullptr);
VectorXd second_order_inv_step(const InverterSpec& spec, const VectorXd& x, const VectorXd& x_next,
                               int j, long* nfe = nullptr);

// Full composition eps -> T. second_order warms up with a first_order step at
// j = N and reuses the previous predictor value afterwards (N calls total).
VectorXd invert_full(const InverterSpec& spec, const VectorXd& x_eps, long* nfe = nullptr);

// Partial composition from the grid node at or below t up to T. t within a
// node tolerance of T runs zero steps and returns the input unchanged.
VectorXd invert_partial(const InverterSpec& spec, const VectorXd& x, double t,
                        long* nfe = nullptr);

// Entry index j_t for invert_partial; 0 means zero steps.
int inversion_entry_index(const TimeGrid& grid, double t);

}  // namespace simdm
