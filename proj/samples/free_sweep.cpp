// Entanglement entropy of free fermions on growing intervals, fitted against
// a L + b ln L + c.

#include <cstdio>

#include "szego/asymptotics.hpp"

int main() {
  using namespace szego;
  ModelConfig cfg;
  cfg.energy = 4.0;
  const auto grid = make_l_grid(default_grid(1), cfg.energy);
  const std::vector<TestFunction> hs{renyi(1.0, LogBase::Nats), renyi(2.0, LogBase::Nats)};
  const auto table = run_sweep(cfg, grid, hs);
  for (const auto& r : table.rows) std::printf("L = %8.3f  S_1 = %.6f  S_2 = %.6f\n", r.L, r.traces[0], r.traces[1]);
  for (const auto& h : hs) {
    const auto f = fit_asymptotics(table, h);
    std::printf("%s: b = %.5f (predicted %.5f, sigma %.1e)\n", h.label.c_str(), f.b(), f.prediction->b_pred, f.sigma(1));
  }
}
