#pragma once

#include "devrate/cli/output.hpp"
#include "devrate/decompose.hpp"
#include "devrate/ratefn.hpp"
#include "devrate/scgf.hpp"

#include <cstdio>
#include <functional>
#include <ostream>
#include <string>

namespace devrate::cli {

/// Quick oracle checks on Ornstein-Uhlenbeck; true when all pass.
inline bool selftest(std::ostream& log) {
  const DiffusionModel ou = ornstein_uhlenbeck(1.0);
  const Mesh mesh = Mesh::uniform(1, -8, 8, 401);
  const ScalarField x = ou.field("x");
  bool all = true;
  auto check = [&](const std::string& name, const std::function<double()>& measure, double limit) {
    double v = kNaN;
    std::string err;
    try {
      v = measure();
    } catch (const std::exception& e) {
      err = e.what();
    }
    const bool pass = err.empty() && v <= limit;
    all = all && pass;
    log << (pass ? "PASS " : "FAIL ") << name << ": " << (err.empty() ? format_number(v) : err) << " (limit "
        << format_number(limit) << ")\n";
  };

  check("generator row sums", [&] {
    const GeneratorDefects d = generator_defects(assemble_generator(ou, mesh).L);
    return d.max_row_sum / std::max(1.0, d.max_entry);
  }, 1e-12);

  check("SCGF of x is theta^2", [&] {
    const ScgfCurve c = scgf_spectral(ou, x, {-1.0, -0.5, 0.5, 1.0}, mesh);
    double worst = 0.0;
    for (const ScgfPoint& p : c.points) worst = std::max(worst, std::abs(p.lambda - p.theta * p.theta));
    return worst;
  }, 1e-3);

  check("rate of x is a^2/4", [&] {
    std::vector<double> thetas;
    for (int k = -20; k <= 20; ++k) thetas.push_back(0.1 * k);
    const RateCurve r = legendre_transform(scgf_spectral(ou, x, thetas, mesh), {-2.0, -1.0, 0.0, 1.0, 2.0});
    double worst = 0.0;
    for (std::size_t k = 0; k < r.a.size(); ++k) worst = std::max(worst, std::abs(r.I[k] - r.a[k] * r.a[k] / 4.0));
    return worst;
  }, 5e-3);

  check("decomposition of N(2,1) has I = 1", [&] {
    const DecompositionContext ctx = DecompositionContext::build(ou, mesh);
    const DecompositionResult r = decompose(ctx, ctx.perturbation(ou.field("2*x - 2")));
    return std::abs(r.I() - 1.0) + r.IA;
  }, 1e-2);

  return all;
}

}  // namespace devrate::cli
