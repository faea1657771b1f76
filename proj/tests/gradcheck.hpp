#pragma once

// Finite-difference check of the model's backpropagated gradients.

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "ved/losses.hpp"

namespace gradcheck {

/// Input 4x3, r = 2, m = 3 with a narrow channel schedule.
inline ved::ArchConfig tiny_arch() {
  ved::ArchConfig a;
  a.height = 4;
  a.width = 3;
  a.latent_dim = 2;
  a.channels = {1, 2, 3, 4, 5, 6};
  a.decoder_hidden = 6;
  a.output_dim = 3;
  return a;
}

struct Result {
  int checked = 0;
  int expected = 0;
  double worst = 0.0;
  std::vector<std::string> failures;
};

/// Compares backprop gradients of the total loss (B = 4, beta = lambda =
/// 0.01) with central differences at `step`. With `extrapolate`, quotients at
/// step and step / 2 are combined to cancel the O(step^2) truncation term.
/// Gradients that vanish identically (taps that only read padding) are
/// compared in absolute terms.
inline Result run(std::uint64_t model_seed, std::uint64_t data_seed, double step, bool extrapolate,
                  double tolerance = 1e-4) {
  using Md = Eigen::MatrixXd;
  ved::VedModel<double> model(tiny_arch(), model_seed);
  ved::Rng rng(data_seed);
  const int batch = 4;
  const Md x = ved::standard_normal<double>(rng, 12, batch);
  const Md y = ved::standard_normal<double>(rng, 3, batch);
  const Md eps = ved::standard_normal<double>(rng, 2, batch);
  const double beta = 0.01, lambda = 0.01;

  (void)ved::loss_and_backward(model, x, y, eps, beta, lambda);
  auto params = model.parameters();
  std::vector<std::vector<double>> analytic;
  for (const auto& p : params) analytic.emplace_back(p.grad, p.grad + p.size);

  auto loss_at = [&]() {
    return ved::loss_from_forward(y, model.forward(x, eps, ved::Mode::Train), beta, lambda).total;
  };

  Result out;
  out.expected = static_cast<int>(model.parameter_count());
  for (std::size_t k = 0; k < params.size(); ++k) {
    for (Eigen::Index i = 0; i < params[k].size; ++i) {
      double& w = params[k].value[i];
      const double saved = w;
      auto central = [&](double h) {
        w = saved + h;
        const double up = loss_at();
        w = saved - h;
        const double down = loss_at();
        w = saved;
        return (up - down) / (2.0 * h);
      };
      double fd = central(step);
      if (extrapolate) fd = (4.0 * central(0.5 * step) - fd) / 3.0;
      const double an = analytic[k][static_cast<std::size_t>(i)];
      const double scale = std::max(std::abs(fd), std::abs(an));
      const double err = scale < 1e-9 ? std::abs(fd - an) / tolerance * 1e-9 : std::abs(fd - an) / scale;
      out.worst = std::max(out.worst, err);
      ++out.checked;
      if (err > tolerance) {
        std::ostringstream msg;
        msg << params[k].name << "[" << i << "] analytic " << an << " numeric " << fd;
        out.failures.push_back(msg.str());
      }
    }
  }
  return out;
}

}  // namespace gradcheck
