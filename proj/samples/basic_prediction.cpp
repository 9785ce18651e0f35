// Closed-form coefficients for a few test functions on the interval [-1, 1].

#include <cstdio>

#include "szego/widom.hpp"

int main() {
  using namespace szego;
  const auto domain = Domain::interval(-1.0, 1.0);
  const double E = 4.0;
  std::printf("%-16s %-12s %-12s %s\n", "h", "I(h)", "a_pred", "b_pred");
  for (const char* name : {"renyi:1:nats", "renyi:2:nats", "renyi:1:bits", "s:1", "s:2", "id"}) {
    const auto h = parse_test_function(name);
    const auto p = predict_trace(h, E, domain);
    std::printf("%-16s %-12.8f %-12.8f %.8f\n", name, widom_functional(h), p.a_pred, p.b_pred);
  }
  for (double a : {0.4, 0.6, 2.0})
    for (int d : {1, 2}) {
      const auto r = check_membership(renyi(a, LogBase::Nats), d);
      std::printf("renyi %.1f in H_%d: %s\n", a, d, r.in_H_d ? "yes" : "no");
    }
}
