#pragma once

#include <utility>

#include "ivgan/autodiff.hpp"
#include "ivgan/tensor.hpp"

namespace ivgan {

enum class BaseLoss { vanilla, lsgan };

inline constexpr double kProbabilityFloor = 1e-12;

// Adversarial terms on raw discriminator scores.
//   vanilla: D minimizes -E log s(real) - E log(1 - s(fake)); G uses the
//            non-saturating -E log s(fake).
//   lsgan:   D minimizes 1/2 E(real - 1)^2 + 1/2 E fake^2; G minimizes
//            1/2 E(fake - 1)^2.
Var adv_loss_d(BaseLoss kind, Var d_real, Var d_fake);
Var adv_loss_g(BaseLoss kind, Var d_fake);

struct AdversarialValues {
  double loss_d;
  double loss_g;
};

AdversarialValues adv_loss_vanilla(const Tensor& d_real, const Tensor& d_fake);
AdversarialValues adv_loss_lsgan(const Tensor& d_real, const Tensor& d_fake);

// Batch mean of -e_i^T log f(x'), probabilities floored at 1e-12.
Var classifier_ce(Var probs, const Tensor& labels);
double classifier_ce(const Tensor& probs, const Tensor& labels);

// The quantity G and E minimize: -classifier_ce. Chance level gives -log k.
Var intervention_loss_ge(Var probs, const Tensor& labels);
double intervention_loss_ge(const Tensor& probs, const Tensor& labels);

// Batch mean of ||x_rec - x||_1 plus batch mean of ||z_rec - z_int||_1.
Var recon_loss(Var x, Var x_rec, Var z_int, Var z_rec);
double recon_loss(const Tensor& x, const Tensor& x_rec, const Tensor& z_int, const Tensor& z_rec);

struct RegularizationCoeffs {
  double lambda_gd = 0.25;
  double mu_gd = 0.5;
  double lambda_e = 1.0;
  double mu_e = 1.0;

  void validate() const;
  // The classifier only matters when some player weighs the IV loss.
  bool intervention_active() const { return mu_gd != 0.0 || mu_e != 0.0; }
  friend bool operator==(const RegularizationCoeffs&, const RegularizationCoeffs&) = default;
};

enum class LossRole { generator_discriminator, encoder };

// generator role: adv_g + lambda_gd * recon + mu_gd * iv
// encoder role:   lambda_e * recon + mu_e * iv (no adversarial term)
double total_ge_loss(double adv_g, double recon, double iv_ge, const RegularizationCoeffs& c,
                     LossRole role);

struct LossReport {
  double adv_d = 0.0;
  double adv_g = 0.0;
  double iv_classifier_ce = 0.0;
  double iv_generator = 0.0;
  double recon = 0.0;
  double total_g = 0.0;

  bool all_finite() const;
  friend bool operator==(const LossReport&, const LossReport&) = default;
};

}  // namespace ivgan
