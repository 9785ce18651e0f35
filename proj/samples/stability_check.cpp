// A potential well changes tr h(P_L) only by o(ln L): compare a lattice sweep
// with and without the well on a fixed Dirichlet box.

#include <cstdio>

#include "szego/asymptotics.hpp"

int main() {
  using namespace szego;
  ModelConfig cfg;
  cfg.energy = 1.2;
  cfg.engine = Engine::Lattice;
  cfg.lattice.spacing = 0.05;
  cfg.lattice.box_half_width = 60.0;
  const auto grid = make_l_grid({GridKind::Geometric, GridVariable::L, 4.0, 40.0, 10}, cfg.energy);
  const auto h = renyi(1.0, LogBase::Nats);

  const auto free = run_sweep(cfg, grid, {h});
  cfg.potential = Potential::square_well(1, -5.0, 1.0);
  const auto well = run_sweep(cfg, grid, {h});

  const auto s = stability_report(well, free, h);
  for (std::size_t i = 0; i < s.L.size(); ++i)
    std::printf("L = %6.2f  delta = %+.5f  |delta|/ln L = %.5f\n", s.L[i], s.delta[i], s.ratio[i]);
  std::printf("trend: %s\n", to_string(s.trend));
  for (const auto& r : {check_qdiff_plateau(well), check_telescope(well), check_q2_identity(well)})
    std::printf("%-8s %s\n", to_string(r.verdict), r.detail.c_str());
}
