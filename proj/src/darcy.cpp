#include "geotherm/darcy.hpp"

#include <cmath>

namespace geotherm {

namespace {

// Local dof bookkeeping for one edge: owner cg (4), owner dg, neighbor cg (4),
// neighbor dg. Boundary edges use the first five entries.
struct EdgeLocal {
  std::array<int, 10> dof{};
  int n = 5;
  // traces and normal gradients of each local dof from either side
  std::array<double, 10> trace_own{}, trace_nb{};
  std::array<double, 10> gradn_own{}, gradn_nb{};
};

EdgeLocal edge_local(const StructuredMesh& m, const Edge& g, double s) {
  EdgeLocal L;
  const int n_v = m.n_vertices();
  auto vo = m.basis_vertices(g.owner);
  for (int l = 0; l < 4; ++l) L.dof[l] = vo[l];
  L.dof[4] = n_v + g.owner;

  auto [xo, yo] = StructuredMesh::face_ref_point(g.owner_face, s);
  auto phi_o = q1_values(xo, yo);
  auto dphi_o = q1_ref_gradients(xo, yo);
  for (int l = 0; l < 4; ++l) {
    L.trace_own[l] = phi_o[l];
    L.gradn_own[l] =
        dphi_o[l].x() / m.hx * g.normal.x() + dphi_o[l].y() / m.hy * g.normal.y();
  }
  L.trace_own[4] = 1.0;

  if (!g.is_boundary()) {
    L.n = 10;
    auto vn = m.basis_vertices(g.neighbor);
    for (int l = 0; l < 4; ++l) L.dof[5 + l] = vn[l];
    L.dof[9] = n_v + g.neighbor;
    auto [xn, yn] = StructuredMesh::face_ref_point(g.neighbor_face, s);
    auto phi_n = q1_values(xn, yn);
    auto dphi_n = q1_ref_gradients(xn, yn);
    for (int l = 0; l < 4; ++l) {
      L.trace_nb[5 + l] = phi_n[l];
      L.gradn_nb[5 + l] =
          dphi_n[l].x() / m.hx * g.normal.x() + dphi_n[l].y() / m.hy * g.normal.y();
    }
    L.trace_nb[9] = 1.0;
  }
  return L;
}

}  // namespace

double effective_pressure_penalty(const PermeabilityField& perm,
                                  const PressureProblem& prob) {
  return prob.alpha_p > 0.0 ? prob.alpha_p : 10.0 * perm.max_mobility();
}

void assemble_pressure(const StructuredMesh& m, const PermeabilityField& perm,
                       const PressureProblem& prob, SparseAssembler& A,
                       Eigen::VectorXd& rhs) {
  perm.validate();
  const int n_v = m.n_vertices();
  const int n = eg_dof_count(m);
  const auto& q = quadrature();
  const double alpha = effective_pressure_penalty(perm, prob);

  if (!A.finalized()) {
    for (int e = 0; e < m.n_cells(); ++e) {
      auto vs = m.basis_vertices(e);
      std::vector<int> dofs{vs[0], vs[1], vs[2], vs[3], n_v + e};
      A.reserve_block(dofs, dofs);
    }
    for (const auto& g : m.edges) {
      if (g.tag == PressureTag::NeumannP) continue;
      std::vector<int> dofs;
      auto vo = m.basis_vertices(g.owner);
      dofs.assign(vo.begin(), vo.end());
      dofs.push_back(n_v + g.owner);
      if (!g.is_boundary()) {
        auto vn = m.basis_vertices(g.neighbor);
        dofs.insert(dofs.end(), vn.begin(), vn.end());
        dofs.push_back(n_v + g.neighbor);
      }
      A.reserve_block(dofs, dofs);
    }
    A.finalize(n);
  }
  A.zero();
  rhs.setZero(n);

  const double area = m.hx * m.hy;
  for (int e = 0; e < m.n_cells(); ++e) {
    const double kappa = perm.mobility(e);
    auto vs = m.basis_vertices(e);
    for (int k = 0; k < QuadratureRule::n_cell; ++k) {
      const double w = q.cell_w[k] * area;
      auto dphi = q1_ref_gradients(q.cell_x[k], q.cell_y[k]);
      Vec2 gp[4];
      for (int l = 0; l < 4; ++l) gp[l] = {dphi[l].x() / m.hx, dphi[l].y() / m.hy};
      for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b)
          A.add(vs[a], vs[b], kappa * w * gp[a].dot(gp[b]));
      if (prob.source) {
        const double qp = prob.source(m.map_to_physical(e, q.cell_x[k], q.cell_y[k]));
        auto phi = q1_values(q.cell_x[k], q.cell_y[k]);
        for (int l = 0; l < 4; ++l) rhs[vs[l]] += w * qp * phi[l];
        rhs[n_v + e] += w * qp;
      }
    }
  }

  for (const auto& g : m.edges) {
    const bool interior = !g.is_boundary();
    if (g.tag == PressureTag::NeumannP) {
      if (prob.neumann) {
        for (int s = 0; s < QuadratureRule::n_edge; ++s) {
          EdgeLocal L = edge_local(m, g, q.edge_x[s]);
          const double w = q.edge_w[s] * g.length;
          const double gn = prob.neumann(m.edge_point(g, q.edge_x[s]));
          for (int d = 0; d < L.n; ++d) rhs[L.dof[d]] -= w * gn * L.trace_own[d];
        }
      }
      continue;
    }
    const double ko = perm.mobility(g.owner);
    const double kn = interior ? perm.mobility(g.neighbor) : 0.0;
    const double pen = alpha / g.length;
    for (int s = 0; s < QuadratureRule::n_edge; ++s) {
      EdgeLocal L = edge_local(m, g, q.edge_x[s]);
      const double w = q.edge_w[s] * g.length;
      double jump_k[10], jump[10], avg_g[10];
      for (int d = 0; d < L.n; ++d) {
        if (interior) {
          jump_k[d] = ko * L.trace_own[d] - kn * L.trace_nb[d];
          jump[d] = L.trace_own[d] - L.trace_nb[d];
          avg_g[d] = 0.5 * (ko * L.gradn_own[d] + kn * L.gradn_nb[d]);
        } else {
          jump_k[d] = ko * L.trace_own[d];
          jump[d] = L.trace_own[d];
          avg_g[d] = ko * L.gradn_own[d];
        }
      }
      for (int a = 0; a < L.n; ++a) {      // test
        for (int b = 0; b < L.n; ++b) {    // trial
          double v = pen * w * jump_k[b] * jump[a] - w * avg_g[b] * jump[a];
          if (prob.theta_ip != 0.0) v += prob.theta_ip * w * avg_g[a] * jump[b];
          if (v != 0.0) A.add(L.dof[a], L.dof[b], v);
        }
      }
      if (!interior && g.tag == PressureTag::DirichletP) {
        if (!prob.dirichlet) fail("pressure: Dirichlet edge without p_D data");
        const double pd = prob.dirichlet(m.edge_point(g, q.edge_x[s]));
        for (int d = 0; d < L.n; ++d) {
          rhs[L.dof[d]] += pen * w * ko * pd * jump[d];
          if (prob.theta_ip != 0.0) rhs[L.dof[d]] += prob.theta_ip * w * pd * avg_g[d];
        }
      }
    }
  }
}

EGFunction solve_pressure(const StructuredMesh& m, const PermeabilityField& perm,
                          const PressureProblem& prob, const SolverConfig& solver,
                          SolveReport* report) {
  SparseAssembler A;
  Eigen::VectorXd rhs;
  assemble_pressure(m, perm, prob, A, rhs);
  LinearSolver lin(solver);
  Eigen::VectorXd x;
  SolveReport rep = lin.solve(A.matrix(), rhs, x);
  if (report) *report = rep;
  EGFunction p;
  p.cg = x.head(m.n_vertices());
  p.dg = x.tail(m.n_cells());
  return p;
}

VelocityField reconstruct_velocity(const StructuredMesh& m, const PermeabilityField& perm,
                                   const EGFunction& p_h, const PressureProblem& prob) {
  const auto& q = quadrature();
  const double alpha = effective_pressure_penalty(perm, prob);
  VelocityField v;
  v.resize(m);

  for (int e = 0; e < m.n_cells(); ++e) {
    Vec2 u = -perm.mobility(e) * gradient(m, p_h, e, 0.5, 0.5);
    v.cell_ux.row(e).setConstant(u.x());
    v.cell_uy.row(e).setConstant(u.y());
    v.rep_ux[e] = u.x();
    v.rep_uy[e] = u.y();
  }
  for (int k = 0; k < m.n_edges(); ++k) {
    const Edge& g = m.edges[k];
    double own = Vec2(v.rep_ux[g.owner], v.rep_uy[g.owner]).dot(g.normal);
    v.edge_un_own.row(k).setConstant(own);
    if (!g.is_boundary()) {
      double nb = Vec2(v.rep_ux[g.neighbor], v.rep_uy[g.neighbor]).dot(g.normal);
      v.edge_un_nb.row(k).setConstant(nb);
    }
  }

  for (int k = 0; k < m.n_edges(); ++k) {
    const Edge& g = m.edges[k];
    const double ko = perm.mobility(g.owner);
    const double pen = alpha / g.length;
    double mean = 0.0;
    for (int s = 0; s < QuadratureRule::n_edge; ++s) {
      const double sq = q.edge_x[s];
      auto [xo, yo] = StructuredMesh::face_ref_point(g.owner_face, sq);
      double un = 0.0;
      if (!g.is_boundary()) {
        const double kn = perm.mobility(g.neighbor);
        auto [xn, yn] = StructuredMesh::face_ref_point(g.neighbor_face, sq);
        const double go = gradient(m, p_h, g.owner, xo, yo).dot(g.normal);
        const double gn = gradient(m, p_h, g.neighbor, xn, yn).dot(g.normal);
        const double po = evaluate(m, p_h, g.owner, xo, yo);
        const double pn = evaluate(m, p_h, g.neighbor, xn, yn);
        un = -0.5 * (ko * go + kn * gn) + pen * (ko * po - kn * pn);
      } else if (g.tag == PressureTag::NeumannP) {
        un = prob.neumann ? prob.neumann(m.edge_point(g, sq)) : 0.0;
      } else {
        const double go = gradient(m, p_h, g.owner, xo, yo).dot(g.normal);
        const double po = evaluate(m, p_h, g.owner, xo, yo);
        const double pd = prob.dirichlet(m.edge_point(g, sq));
        un = -ko * go + pen * ko * (po - pd);
      }
      v.edge_un(k, s) = un;
      mean += q.edge_w[s] * un;
    }
    v.edge_mean_un[k] = mean;
  }
  return v;
}

namespace {
double cell_source_integral(const StructuredMesh& m, const SpaceTimeField& q_p, int e,
                            double* max_abs) {
  if (!q_p) return 0.0;
  const auto& q = quadrature();
  const double area = m.hx * m.hy;
  double acc = 0.0;
  for (int k = 0; k < QuadratureRule::n_cell; ++k) {
    double val = q_p(m.map_to_physical(e, q.cell_x[k], q.cell_y[k]));
    acc += q.cell_w[k] * area * val;
    if (max_abs) *max_abs = std::max(*max_abs, std::abs(val));
  }
  return acc;
}
}  // namespace

double check_local_conservation(const StructuredMesh& m, const VelocityField& vel,
                                const SpaceTimeField& q_p, Eigen::VectorXd* per_cell) {
  Eigen::VectorXd balance = Eigen::VectorXd::Zero(m.n_cells());
  for (int k = 0; k < m.n_edges(); ++k) {
    const Edge& g = m.edges[k];
    const double flux = vel.edge_flux(m, k);
    balance[g.owner] += flux;
    if (!g.is_boundary()) balance[g.neighbor] -= flux;
  }
  double max_abs_q = 0.0;
  double worst = 0.0;
  Eigen::VectorXd res(m.n_cells());
  for (int e = 0; e < m.n_cells(); ++e) {
    double src = cell_source_integral(m, q_p, e, &max_abs_q);
    res[e] = balance[e] - src;
  }
  const double scale = std::max(1.0, max_abs_q * m.hx * m.hy);
  for (int e = 0; e < m.n_cells(); ++e) {
    res[e] = std::abs(res[e]) / scale;
    worst = std::max(worst, res[e]);
  }
  if (per_cell) *per_cell = res;
  return worst;
}

double global_flux_balance(const StructuredMesh& m, const VelocityField& vel,
                           const SpaceTimeField& q_p) {
  double acc = 0.0;
  for (int k = 0; k < m.n_edges(); ++k)
    if (m.edges[k].is_boundary()) acc += vel.edge_flux(m, k);
  for (int e = 0; e < m.n_cells(); ++e) acc -= cell_source_integral(m, q_p, e, nullptr);
  return acc;
}

}  // namespace geotherm
