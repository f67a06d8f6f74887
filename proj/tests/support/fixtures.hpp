// Built-in chart fixtures used across the suites: classical Lie-Poisson
// duals, the symplectic plane, and a quadratic structure with genuinely
// varying rank.
#pragma once

#include <map>

#include "pg/classes.hpp"
#include "pg/fields.hpp"

namespace pgtest {

using pg::Expr;

// {x1,x2} = x1 (dual of the nonabelian 2-dim algebra [w1,w2] = w1)
inline pg::PoissonStructure aff1_dual() {
  return pg::PoissonStructure(2, {{{0, 1}, Expr::var(0)}});
}

// {x1,x2} = x3, {x1,x3} = -x2, {x2,x3} = x1
inline pg::PoissonStructure so3_dual() {
  return pg::PoissonStructure(3, {{{0, 1}, Expr::var(2)},
                                  {{0, 2}, -Expr::var(1)},
                                  {{1, 2}, Expr::var(0)}});
}

// basis (e, f, h): [e,f] = h, [e,h] = -2e, [f,h] = 2f
inline pg::PoissonStructure sl2_dual() {
  return pg::PoissonStructure(
      3, {{{0, 1}, Expr::var(2)},
          {{0, 2}, Expr::constant(-2.0) * Expr::var(0)},
          {{1, 2}, Expr::constant(2.0) * Expr::var(1)}});
}

inline pg::PoissonStructure symplectic2() {
  return pg::PoissonStructure(2, {{{0, 1}, Expr::constant(1.0)}});
}

// pi^{12} = x1*x2: rank drops on the coordinate axes
inline pg::PoissonStructure quadratic2() {
  return pg::PoissonStructure(2, {{{0, 1}, Expr::var(0) * Expr::var(1)}});
}

// Non-Jacobi bivector: pi^{12} = x3, pi^{13} = -x2, pi^{23} = x1 + x3^2
// has jacobiator component J^{123} = 2*x2*x3.
inline pg::PoissonStructure non_jacobi3() {
  return pg::PoissonStructure(
      3, {{{0, 1}, Expr::var(2)},
          {{0, 2}, -Expr::var(1)},
          {{1, 2}, Expr::var(0) + pow(Expr::var(2), 2)}});
}

// Solvable book algebra: [e1,e2] = e2, [e1,e3] = e3 (tr ad e1 = 2)
inline pg::PoissonStructure solvable3() {
  return pg::PoissonStructure(3, {{{0, 1}, Expr::var(1)},
                                  {{0, 2}, Expr::var(2)}});
}

inline pg::LieAlgebra aff1_algebra() {
  pg::LieAlgebra g(2);
  g.set_bracket(0, 1, {1.0, 0.0});  // [w1,w2] = w1
  g.validate();
  return g;
}

inline pg::LieAlgebra so3_algebra() {
  pg::LieAlgebra g(3);
  g.set_bracket(0, 1, {0.0, 0.0, 1.0});
  g.set_bracket(1, 2, {1.0, 0.0, 0.0});
  g.set_bracket(2, 0, {0.0, 1.0, 0.0});
  g.validate();
  return g;
}

inline pg::LieAlgebra sl2_algebra() {
  pg::LieAlgebra g(3);
  g.set_bracket(0, 1, {0.0, 0.0, 1.0});    // [e,f] = h
  g.set_bracket(0, 2, {-2.0, 0.0, 0.0});   // [e,h] = -2e
  g.set_bracket(1, 2, {0.0, 2.0, 0.0});    // [f,h] = 2f
  g.validate();
  return g;
}

inline pg::LieAlgebra solvable3_algebra() {
  pg::LieAlgebra g(3);
  g.set_bracket(0, 1, {0.0, 1.0, 0.0});
  g.set_bracket(0, 2, {0.0, 0.0, 1.0});
  g.validate();
  return g;
}

inline pg::LieAlgebra so3_aff1_algebra() {
  pg::LieAlgebra g(5);
  g.set_bracket(0, 1, {0.0, 0.0, 1.0, 0.0, 0.0});
  g.set_bracket(1, 2, {1.0, 0.0, 0.0, 0.0, 0.0});
  g.set_bracket(2, 0, {0.0, 1.0, 0.0, 0.0, 0.0});
  g.set_bracket(3, 4, {0.0, 0.0, 0.0, 1.0, 0.0});
  g.validate();
  return g;
}

}  // namespace pgtest
