#include "ivgan/gradcheck.hpp"

#include <algorithm>
#include <cmath>

#include "ivgan/errors.hpp"

namespace ivgan {

namespace {

struct Probe {
  double value;
  std::vector<double> kinks;
};

Probe evaluate(const ScalarFn& f, const Tensor& x) {
  Tape tape;
  tape.set_kink_tracking(true);
  Var out = f(tape, tape.leaf(x));
  return Probe{out.value().item(), tape.kink_inputs()};
}

// True when some kink input moves between the two stencil points and either
// changes side or comes within kKinkTolerance of the kink.
bool straddles_kink(const std::vector<double>& plus, const std::vector<double>& minus) {
  if (plus.size() != minus.size()) return true;
  for (std::size_t i = 0; i < plus.size(); ++i) {
    if (plus[i] == minus[i]) continue;
    if ((plus[i] > 0.0) != (minus[i] > 0.0)) return true;
    if (std::min(std::abs(plus[i]), std::abs(minus[i])) < kKinkTolerance) return true;
  }
  return false;
}

}  // namespace

GradCheckResult grad_check(const ScalarFn& f, const Tensor& x, double step) {
  if (!(step > 0.0)) throw ContractError("grad_check step must be positive");
  Tape tape;
  Var input = tape.leaf(x);
  Var out = f(tape, input);
  const Tensor analytic = tape.backward(out).of(input);

  GradCheckResult result;
  Tensor probe = x;
  for (std::size_t c = 0; c < x.size(); ++c) {
    probe[c] = x[c] + step;
    const Probe plus = evaluate(f, probe);
    probe[c] = x[c] - step;
    const Probe minus = evaluate(f, probe);
    probe[c] = x[c];

    if (straddles_kink(plus.kinks, minus.kinks)) {
      result.excluded.push_back(c);
      continue;
    }
    const double numeric = (plus.value - minus.value) / (2.0 * step);
    const double err = std::abs(analytic[c] - numeric) / std::max(1.0, std::abs(analytic[c]));
    result.max_rel_error = std::max(result.max_rel_error, err);
    ++result.checked;
  }
  return result;
}

}  // namespace ivgan
