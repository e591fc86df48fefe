#ifndef EDGEKIT_OPTIM_HPP
#define EDGEKIT_OPTIM_HPP

#include <cstdint>
#include <vector>

#include "edgekit/params.hpp"

namespace edgekit {

/// Bias-corrected Adam over a ParameterStore. Moments are kept per
/// parameter, in store order, shapes matching the parameters.
class AdamState {
public:
    explicit AdamState(const ParameterStore& store, Real beta1 = Real(0.9),
                       Real beta2 = Real(0.999), Real eps = Real(1e-8));

    /// One update from the gradients currently held in the store.
    /// Parameters with trainable=false are skipped.
    void step(ParameterStore& store, Real lr);

    std::uint64_t steps_taken() const { return t_; }
    Real beta1() const { return beta1_; }
    Real beta2() const { return beta2_; }
    Real eps() const { return eps_; }

private:
    std::vector<Tensor> m_;
    std::vector<Tensor> v_;
    Real beta1_, beta2_, eps_;
    std::uint64_t t_ = 0;
};

/// Scales all trainable gradients by c/norm when the global L2 norm
/// exceeds c; identity otherwise. Returns the pre-clip norm.
Real clip_by_global_norm(ParameterStore& store, Real c = Real(5.0));

/// Epoch learning-rate schedule eta_t = eta0 / (1 + rho * t) where t is
/// the number of completed epochs.
inline Real lr_at_epoch(Real eta0, Real rho, std::uint64_t epochs_completed) {
    return eta0 / (Real(1) + rho * static_cast<Real>(epochs_completed));
}

}  // namespace edgekit

#endif
