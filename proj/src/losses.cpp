#include "ivgan/losses.hpp"

#include <cmath>
#include <functional>

#include "ivgan/errors.hpp"
#include "ivgan/ops.hpp"

namespace ivgan {

namespace {

double eval(const std::function<Var(Tape&)>& build) {
  Tape tape;
  return build(tape).value().item();
}

}  // namespace

Var adv_loss_d(BaseLoss kind, Var d_real, Var d_fake) {
  if (kind == BaseLoss::vanilla) {
    return neg(add(mean(log_sigmoid(d_real)), mean(log_sigmoid(neg(d_fake)))));
  }
  return add(scale(mean(square(add_scalar(d_real, -1.0))), 0.5), scale(mean(square(d_fake)), 0.5));
}

Var adv_loss_g(BaseLoss kind, Var d_fake) {
  if (kind == BaseLoss::vanilla) return neg(mean(log_sigmoid(d_fake)));
  return scale(mean(square(add_scalar(d_fake, -1.0))), 0.5);
}

namespace {

AdversarialValues adv_values(BaseLoss kind, const Tensor& d_real, const Tensor& d_fake) {
  return AdversarialValues{
      eval([&](Tape& t) { return adv_loss_d(kind, t.constant(d_real), t.constant(d_fake)); }),
      eval([&](Tape& t) { return adv_loss_g(kind, t.constant(d_fake)); })};
}

}  // namespace

AdversarialValues adv_loss_vanilla(const Tensor& d_real, const Tensor& d_fake) {
  return adv_values(BaseLoss::vanilla, d_real, d_fake);
}

AdversarialValues adv_loss_lsgan(const Tensor& d_real, const Tensor& d_fake) {
  return adv_values(BaseLoss::lsgan, d_real, d_fake);
}

Var classifier_ce(Var probs, const Tensor& labels) {
  if (!probs.value().same_dims(labels)) {
    throw ShapeError("classifier_ce: probabilities " + dims_to_string(probs.value().dims()) +
                     " vs labels " + dims_to_string(labels.dims()));
  }
  const double n = static_cast<double>(labels.rows());
  Var logp = log(clamp_min(probs, kProbabilityFloor));
  return scale(sum(mul(probs.tape().constant(labels), logp)), -1.0 / n);
}

double classifier_ce(const Tensor& probs, const Tensor& labels) {
  return eval([&](Tape& t) { return classifier_ce(t.constant(probs), labels); });
}

Var intervention_loss_ge(Var probs, const Tensor& labels) {
  return neg(classifier_ce(probs, labels));
}

double intervention_loss_ge(const Tensor& probs, const Tensor& labels) {
  return -classifier_ce(probs, labels);
}

Var recon_loss(Var x, Var x_rec, Var z_int, Var z_rec) {
  const double n_data = static_cast<double>(x.value().rows());
  const double n_latent = static_cast<double>(z_int.value().rows());
  Var data_term = scale(sum(abs(sub(x_rec, x))), 1.0 / n_data);
  Var latent_term = scale(sum(abs(sub(z_rec, z_int))), 1.0 / n_latent);
  return add(data_term, latent_term);
}

double recon_loss(const Tensor& x, const Tensor& x_rec, const Tensor& z_int, const Tensor& z_rec) {
  return eval([&](Tape& t) {
    return recon_loss(t.constant(x), t.constant(x_rec), t.constant(z_int), t.constant(z_rec));
  });
}

void RegularizationCoeffs::validate() const {
  for (double c : {lambda_gd, mu_gd, lambda_e, mu_e}) {
    if (!(c >= 0.0) || !std::isfinite(c)) {
      throw ContractError("regularization coefficients must be finite and nonnegative");
    }
  }
}

double total_ge_loss(double adv_g, double recon, double iv_ge, const RegularizationCoeffs& c,
                     LossRole role) {
  if (role == LossRole::generator_discriminator) {
    return adv_g + c.lambda_gd * recon + c.mu_gd * iv_ge;
  }
  return c.lambda_e * recon + c.mu_e * iv_ge;
}

bool LossReport::all_finite() const {
  for (double v : {adv_d, adv_g, iv_classifier_ce, iv_generator, recon, total_g}) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

}  // namespace ivgan
