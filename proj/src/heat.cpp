#include "geotherm/heat.hpp"

#include <cmath>

namespace geotherm {

namespace {

struct CellBasisTable {
  double phi[QuadratureRule::n_cell][4];
  double dphix[QuadratureRule::n_cell][4];  // reference gradients
  double dphiy[QuadratureRule::n_cell][4];
  CellBasisTable() {
    const auto& q = quadrature();
    for (int k = 0; k < QuadratureRule::n_cell; ++k) {
      auto v = q1_values(q.cell_x[k], q.cell_y[k]);
      auto g = q1_ref_gradients(q.cell_x[k], q.cell_y[k]);
      for (int l = 0; l < 4; ++l) {
        phi[k][l] = v[l];
        dphix[k][l] = g[l].x();
        dphiy[k][l] = g[l].y();
      }
    }
  }
};
const CellBasisTable cb;

struct FaceBasisTable {
  double phi[4][QuadratureRule::n_edge][4];
  double gx[4][QuadratureRule::n_edge][4];
  double gy[4][QuadratureRule::n_edge][4];
  FaceBasisTable() {
    const auto& q = quadrature();
    for (int f = 0; f < 4; ++f)
      for (int s = 0; s < QuadratureRule::n_edge; ++s) {
        auto [xi, eta] = StructuredMesh::face_ref_point(static_cast<Face>(f), q.edge_x[s]);
        auto v = q1_values(xi, eta);
        auto g = q1_ref_gradients(xi, eta);
        for (int l = 0; l < 4; ++l) {
          phi[f][s][l] = v[l];
          gx[f][s][l] = g[l].x();
          gy[f][s][l] = g[l].y();
        }
      }
  }
};
const FaceBasisTable fb;

}  // namespace

TemperatureState TemperatureState::initial(const StructuredMesh& m, ModelKind kind,
                                           const std::vector<ScalarField>& ics) {
  require(static_cast<int>(ics.size()) == n_fields(kind),
          "temperature: wrong number of initial fields");
  TemperatureState s;
  s.kind = kind;
  for (const auto& g : ics) s.fields.push_back(interpolate_eg(m, g));
  return s;
}

HeatSystem::HeatSystem(const StructuredMesh& mesh, int nf)
    : mesh_(mesh), nf_(nf), block_(eg_dof_count(mesh)) {
  const int n_v = mesh.n_vertices();
  for (int e = 0; e < mesh.n_cells(); ++e) {
    auto vs = mesh.basis_vertices(e);
    std::vector<int> local{vs[0], vs[1], vs[2], vs[3], n_v + e};
    for (int fa = 0; fa < nf_; ++fa)
      for (int fc = 0; fc < nf_; ++fc) {
        std::vector<int> rows, cols;
        for (int d : local) rows.push_back(fa * block_ + d);
        for (int d : local) cols.push_back(fc * block_ + d);
        A_.reserve_block(rows, cols);
      }
  }
  for (const auto& g : mesh.edges) {
    std::vector<int> dofs;
    auto vo = mesh.basis_vertices(g.owner);
    dofs.assign(vo.begin(), vo.end());
    dofs.push_back(n_v + g.owner);
    if (!g.is_boundary()) {
      auto vn = mesh.basis_vertices(g.neighbor);
      dofs.insert(dofs.end(), vn.begin(), vn.end());
      dofs.push_back(n_v + g.neighbor);
    }
    for (int f = 0; f < nf_; ++f) {
      std::vector<int> sys;
      for (int d : dofs) sys.push_back(f * block_ + d);
      A_.reserve_block(sys, sys);
    }
  }
  A_.finalize(nf_ * block_);
}

Eigen::VectorXd HeatSystem::pack(const std::vector<EGFunction>& fields) const {
  Eigen::VectorXd x(nf_ * block_);
  const int n_v = mesh_.n_vertices();
  for (int f = 0; f < nf_; ++f) {
    x.segment(f * block_, n_v) = fields[f].cg;
    x.segment(f * block_ + n_v, mesh_.n_cells()) = fields[f].dg;
  }
  return x;
}

std::vector<EGFunction> HeatSystem::unpack(const Eigen::VectorXd& x) const {
  std::vector<EGFunction> out(nf_);
  const int n_v = mesh_.n_vertices();
  for (int f = 0; f < nf_; ++f) {
    out[f].cg = x.segment(f * block_, n_v);
    out[f].dg = x.segment(f * block_ + n_v, mesh_.n_cells());
  }
  return out;
}

void HeatSystem::assemble(const HeatProblem& prob, const TemperatureState& state,
                          double dt, TimeScheme scheme, double t_next) {
  require(static_cast<int>(prob.fields.size()) == nf_, "heat: field count mismatch");
  if (scheme == TimeScheme::BDF2)
    require(state.history_depth >= 1, "heat: BDF2 requested without history");

  const auto& q = quadrature();
  const int n_v = mesh_.n_vertices();
  const double area = mesh_.hx * mesh_.hy;
  const double a0 = scheme == TimeScheme::BE ? 1.0 / dt : 1.5 / dt;
  const double hist1 = scheme == TimeScheme::BE ? 1.0 / dt : 2.0 / dt;
  const double hist2 = scheme == TimeScheme::BE ? 0.0 : -0.5 / dt;

  A_.zero();
  rhs_.setZero(nf_ * block_);

  // --- cell contributions -------------------------------------------------
  for (int e = 0; e < mesh_.n_cells(); ++e) {
    auto vs = mesh_.basis_vertices(e);
    int dof[5];
    for (int l = 0; l < 4; ++l) dof[l] = vs[l];
    dof[4] = n_v + e;

    for (int f = 0; f < nf_; ++f) {
      const auto& fc = prob.fields[f];
      const int off = f * block_;
      const bool advected = fc.adv_weight.size() > 0 && prob.vel != nullptr;
      for (int k = 0; k < QuadratureRule::n_cell; ++k) {
        const double w = q.cell_w[k] * area;
        const double cap = fc.capacity(e, k);
        const double lam = fc.lambda(e, k);

        // values of the five local basis functions (chi_e = 1)
        double val[5];
        for (int l = 0; l < 4; ++l) val[l] = cb.phi[k][l];
        val[4] = 1.0;

        // time term and history
        double told = 0.0, told2 = 0.0;
        {
          const EGFunction& tn = state.fields[f];
          told = tn.dg[e];
          for (int l = 0; l < 4; ++l) told += tn.cg[vs[l]] * cb.phi[k][l];
          if (hist2 != 0.0) {
            const EGFunction& tm = state.prev[f];
            told2 = tm.dg[e];
            for (int l = 0; l < 4; ++l) told2 += tm.cg[vs[l]] * cb.phi[k][l];
          }
        }
        for (int a = 0; a < 5; ++a) {
          for (int b = 0; b < 5; ++b)
            A_.add(off + dof[a], off + dof[b], a0 * w * cap * val[a] * val[b]);
          rhs_[off + dof[a]] += w * cap * val[a] * (hist1 * told + hist2 * told2);
        }

        // diffusion (CG gradients only)
        double gx[4], gy[4];
        for (int l = 0; l < 4; ++l) {
          gx[l] = cb.dphix[k][l] / mesh_.hx;
          gy[l] = cb.dphiy[k][l] / mesh_.hy;
        }
        for (int a = 0; a < 4; ++a)
          for (int b = 0; b < 4; ++b)
            A_.add(off + dof[a], off + dof[b],
                   lam * w * (gx[a] * gx[b] + gy[a] * gy[b]));

        // advection volume: -int w_adv T u.grad(v)
        if (advected) {
          const double ux = prob.vel->cell_ux(e, k), uy = prob.vel->cell_uy(e, k);
          const double wadv = fc.adv_weight(e, k);
          for (int a = 0; a < 4; ++a) {
            const double udg = ux * gx[a] + uy * gy[a];
            for (int b = 0; b < 5; ++b)
              A_.add(off + dof[a], off + dof[b], -wadv * w * val[b] * udg);
          }
        }

        // source
        if (fc.source) {
          const double qv =
              fc.source(mesh_.map_to_physical(e, q.cell_x[k], q.cell_y[k]), t_next);
          for (int a = 0; a < 5; ++a) rhs_[off + dof[a]] += w * qv * val[a];
        }
      }
    }

    // exchange terms (implicit, pairwise antisymmetric)
    for (const auto& ex : prob.exchanges) {
      const int oa = ex.a * block_, ob = ex.b * block_;
      for (int k = 0; k < QuadratureRule::n_cell; ++k) {
        const double w = q.cell_w[k] * area;
        const double lam = ex.coeff(e, k);
        if (lam == 0.0) continue;
        double val[5];
        for (int l = 0; l < 4; ++l) val[l] = cb.phi[k][l];
        val[4] = 1.0;
        for (int a = 0; a < 5; ++a)
          for (int b = 0; b < 5; ++b) {
            const double m = w * lam * val[a] * val[b];
            A_.add(oa + dof[a], oa + dof[b], m);
            A_.add(oa + dof[a], ob + dof[b], -m);
            A_.add(ob + dof[a], ob + dof[b], m);
            A_.add(ob + dof[a], oa + dof[b], -m);
          }
      }
    }
  }

  // --- edge contributions ---------------------------------------------------
  for (int ke = 0; ke < mesh_.n_edges(); ++ke) {
    const Edge& g = mesh_.edges[ke];
    const bool interior = !g.is_boundary();
    const int fo = static_cast<int>(g.owner_face);
    const int fn = interior ? static_cast<int>(g.neighbor_face) : 0;
    auto vo = mesh_.basis_vertices(g.owner);
    std::array<int, 4> vn{};
    if (interior) vn = mesh_.basis_vertices(g.neighbor);

    // local dof list: owner cg(4), owner dg, [neighbor cg(4), neighbor dg]
    int dof[10];
    for (int l = 0; l < 4; ++l) dof[l] = vo[l];
    dof[4] = n_v + g.owner;
    int nloc = 5;
    if (interior) {
      for (int l = 0; l < 4; ++l) dof[5 + l] = vn[l];
      dof[9] = n_v + g.neighbor;
      nloc = 10;
    }

    const Vec2 nrm = g.normal;
    for (int f = 0; f < nf_; ++f) {
      const auto& fc = prob.fields[f];
      const int off = f * block_;
      const bool advected = fc.adv_weight.size() > 0 && prob.vel != nullptr;

      const bool dir_edge =
          !interior && fc.bc.dirichlet_region &&
          fc.bc.dirichlet_region(0.5 * (mesh_.vertices[g.v0] + mesh_.vertices[g.v1]), nrm);

      for (int s = 0; s < QuadratureRule::n_edge; ++s) {
        const double w = q.edge_w[s] * g.length;
        const Vec2 x = mesh_.edge_point(g, q.edge_x[s]);

        double to[10] = {0}, tn[10] = {0}, go[10] = {0}, gn[10] = {0};
        for (int l = 0; l < 4; ++l) {
          to[l] = fb.phi[fo][s][l];
          go[l] = fb.gx[fo][s][l] / mesh_.hx * nrm.x() + fb.gy[fo][s][l] / mesh_.hy * nrm.y();
        }
        to[4] = 1.0;
        if (interior) {
          for (int l = 0; l < 4; ++l) {
            tn[5 + l] = fb.phi[fn][s][l];
            gn[5 + l] =
                fb.gx[fn][s][l] / mesh_.hx * nrm.x() + fb.gy[fn][s][l] / mesh_.hy * nrm.y();
          }
          tn[9] = 1.0;
        }

        // ---- interior-penalty diffusion ----
        if (interior || dir_edge) {
          const double lo = fc.lambda_edge_own(ke, s);
          const double ln = interior ? fc.lambda_edge_nb(ke, s) : 0.0;
          const double pen = fc.alpha / g.length;
          double jump_l[10], jump[10], avg_g[10];
          for (int d = 0; d < nloc; ++d) {
            if (interior) {
              jump_l[d] = lo * to[d] - ln * tn[d];
              jump[d] = to[d] - tn[d];
              avg_g[d] = 0.5 * (lo * go[d] + ln * gn[d]);
            } else {
              jump_l[d] = lo * to[d];
              jump[d] = to[d];
              avg_g[d] = lo * go[d];
            }
          }
          for (int a = 0; a < nloc; ++a)
            for (int b = 0; b < nloc; ++b) {
              double v = pen * w * jump_l[b] * jump[a] - w * avg_g[b] * jump[a];
              if (fc.theta != 0.0) v += fc.theta * w * avg_g[a] * jump[b];
              if (v != 0.0) A_.add(off + dof[a], off + dof[b], v);
            }
          if (dir_edge) {
            const double td = fc.bc.dirichlet_value ? fc.bc.dirichlet_value(x, t_next) : 0.0;
            for (int d = 0; d < nloc; ++d) {
              rhs_[off + dof[d]] += pen * w * lo * td * jump[d];
              if (fc.theta != 0.0) rhs_[off + dof[d]] += fc.theta * w * td * avg_g[d];
            }
          }
        } else {
          // Neumann data: -int g v
          if (fc.bc.neumann_value) {
            const double gv = fc.bc.neumann_value(x, t_next);
            for (int d = 0; d < nloc; ++d) rhs_[off + dof[d]] -= w * gv * to[d];
          }
        }

        // ---- advective face terms (upwind EG traces) ----
        if (advected) {
          const double un = prob.vel->edge_un(ke, s);
          if (interior) {
            const bool up_owner = un >= 0.0;
            const double wadv =
                up_owner ? fc.advw_edge_own(ke, s) : fc.advw_edge_nb(ke, s);
            const double* tup = up_owner ? to : tn;
            // test jump is nonzero only for the two dg dofs
            for (int b = 0; b < nloc; ++b) {
              if (tup[b] == 0.0) continue;
              const double m = w * wadv * un * tup[b];
              A_.add(off + dof[4], off + dof[b], m);
              A_.add(off + dof[9], off + dof[b], -m);
            }
          } else if (g.flow == FlowTag::Inflow) {
            const double wadv = fc.advw_edge_in(ke, s);
            const double tin = fc.bc.inflow_value   ? fc.bc.inflow_value(x, t_next)
                               : fc.bc.dirichlet_value ? fc.bc.dirichlet_value(x, t_next)
                                                       : 0.0;
            for (int a = 0; a < nloc; ++a)
              rhs_[off + dof[a]] -= w * wadv * un * tin * to[a];
          } else {
            const double wadv = fc.advw_edge_own(ke, s);
            for (int a = 0; a < nloc; ++a) {
              if (to[a] == 0.0) continue;
              for (int b = 0; b < nloc; ++b) {
                if (to[b] == 0.0) continue;
                A_.add(off + dof[a], off + dof[b], w * wadv * un * to[b] * to[a]);
              }
            }
          }
        }
      }
    }
  }
}

namespace {

Eigen::ArrayXXd constant_cells(const StructuredMesh& m, double v) {
  return Eigen::ArrayXXd::Constant(m.n_cells(), QuadratureRule::n_cell, v);
}
Eigen::ArrayXXd constant_edges(const StructuredMesh& m, double v) {
  return Eigen::ArrayXXd::Constant(m.n_edges(), QuadratureRule::n_edge, v);
}

// z evaluated at all cell quadrature points and one-sided edge points.
struct ZTables {
  Eigen::ArrayXXd cell, edge_own, edge_nb;
};

ZTables z_tables(const StructuredMesh& m, const EGFunction& z) {
  const auto& q = quadrature();
  ZTables t;
  t.cell.resize(m.n_cells(), QuadratureRule::n_cell);
  for (int e = 0; e < m.n_cells(); ++e)
    for (int k = 0; k < QuadratureRule::n_cell; ++k)
      t.cell(e, k) = evaluate(m, z, e, q.cell_x[k], q.cell_y[k]);
  t.edge_own.resize(m.n_edges(), QuadratureRule::n_edge);
  t.edge_nb.setZero(m.n_edges(), QuadratureRule::n_edge);
  for (int ke = 0; ke < m.n_edges(); ++ke) {
    const Edge& g = m.edges[ke];
    for (int s = 0; s < QuadratureRule::n_edge; ++s) {
      t.edge_own(ke, s) = trace_from(m, z, g, g.owner, g.owner_face, q.edge_x[s]);
      if (!g.is_boundary())
        t.edge_nb(ke, s) = trace_from(m, z, g, g.neighbor, g.neighbor_face, q.edge_x[s]);
    }
  }
  return t;
}

}  // namespace

HeatProblem bind_lte(const StructuredMesh& m, const ThermalParameters& p,
                     const VelocityField* vel, HeatFieldBC bc, TimeField source,
                     double alpha, double theta) {
  HeatProblem prob;
  prob.vel = vel;
  FieldCoefficients f;
  f.capacity = constant_cells(m, p.rho_c_eff());
  f.lambda = constant_cells(m, p.lambda_eff());
  f.lambda_edge_own = constant_edges(m, p.lambda_eff());
  f.lambda_edge_nb = constant_edges(m, p.lambda_eff());
  if (vel) {
    f.adv_weight = constant_cells(m, p.rho_f * p.c_f);
    f.advw_edge_own = constant_edges(m, p.rho_f * p.c_f);
    f.advw_edge_nb = constant_edges(m, p.rho_f * p.c_f);
    f.advw_edge_in = constant_edges(m, p.rho_f * p.c_f);
  }
  f.alpha = alpha;
  f.theta = theta;
  f.bc = std::move(bc);
  f.source = std::move(source);
  prob.fields.push_back(std::move(f));
  return prob;
}

HeatProblem bind_two_temp(const StructuredMesh& m, const ThermalParameters& p,
                          const VelocityField* vel, HeatFieldBC bc_f, HeatFieldBC bc_s,
                          TimeField source_f, TimeField source_s, double alpha,
                          double theta) {
  HeatProblem prob;
  prob.vel = vel;
  FieldCoefficients fl;
  fl.capacity = constant_cells(m, p.C_f());
  fl.lambda = constant_cells(m, p.lambda_f_eff());
  fl.lambda_edge_own = constant_edges(m, p.lambda_f_eff());
  fl.lambda_edge_nb = constant_edges(m, p.lambda_f_eff());
  if (vel) {
    fl.adv_weight = constant_cells(m, p.rho_f * p.c_f);
    fl.advw_edge_own = constant_edges(m, p.rho_f * p.c_f);
    fl.advw_edge_nb = constant_edges(m, p.rho_f * p.c_f);
    fl.advw_edge_in = constant_edges(m, p.rho_f * p.c_f);
  }
  fl.alpha = alpha;
  fl.theta = theta;
  fl.bc = std::move(bc_f);
  fl.source = std::move(source_f);

  FieldCoefficients fs;
  fs.capacity = constant_cells(m, p.C_s());
  fs.lambda = constant_cells(m, p.lambda_s_eff());
  fs.lambda_edge_own = constant_edges(m, p.lambda_s_eff());
  fs.lambda_edge_nb = constant_edges(m, p.lambda_s_eff());
  fs.alpha = alpha;
  fs.theta = theta;
  fs.bc = std::move(bc_s);
  fs.source = std::move(source_s);

  prob.fields.push_back(std::move(fl));
  prob.fields.push_back(std::move(fs));
  prob.exchanges.push_back({0, 1, constant_cells(m, p.h_fs_a_fs)});
  return prob;
}

HeatProblem bind_three_way(const StructuredMesh& m, const ThermalParameters& p,
                           const VelocityField* vel, const EGFunction& z,
                           std::array<HeatFieldBC, 3> bcs, std::array<TimeField, 3> sources,
                           double alpha, double theta, TimeField z_inflow, double t_next) {
  HeatProblem prob;
  prob.vel = vel;
  ZTables zt = z_tables(m, z);
  const double rc = p.rho_f * p.c_f;

  auto fluid = [&](bool injected) {
    FieldCoefficients f;
    f.capacity.resize(m.n_cells(), QuadratureRule::n_cell);
    f.lambda.resize(m.n_cells(), QuadratureRule::n_cell);
    for (int e = 0; e < m.n_cells(); ++e)
      for (int k = 0; k < QuadratureRule::n_cell; ++k) {
        const double zv = zt.cell(e, k);
        f.capacity(e, k) = injected ? p.C_i(zv) : p.C_r(zv);
        f.lambda(e, k) = injected ? p.lambda_i_eff(zv) : p.lambda_r_eff(zv);
      }
    f.lambda_edge_own.resize(m.n_edges(), QuadratureRule::n_edge);
    f.lambda_edge_nb.resize(m.n_edges(), QuadratureRule::n_edge);
    for (int ke = 0; ke < m.n_edges(); ++ke)
      for (int s = 0; s < QuadratureRule::n_edge; ++s) {
        const double zo = zt.edge_own(ke, s), zn = zt.edge_nb(ke, s);
        f.lambda_edge_own(ke, s) = injected ? p.lambda_i_eff(zo) : p.lambda_r_eff(zo);
        f.lambda_edge_nb(ke, s) = injected ? p.lambda_i_eff(zn) : p.lambda_r_eff(zn);
      }
    if (vel) {
      f.adv_weight.resize(m.n_cells(), QuadratureRule::n_cell);
      for (int e = 0; e < m.n_cells(); ++e)
        for (int k = 0; k < QuadratureRule::n_cell; ++k) {
          const double zv = std::clamp(zt.cell(e, k), 0.0, 1.0);
          f.adv_weight(e, k) = (injected ? zv : 1.0 - zv) * rc;
        }
      f.advw_edge_own.resize(m.n_edges(), QuadratureRule::n_edge);
      f.advw_edge_nb.resize(m.n_edges(), QuadratureRule::n_edge);
      f.advw_edge_in.resize(m.n_edges(), QuadratureRule::n_edge);
      const auto& q = quadrature();
      for (int ke = 0; ke < m.n_edges(); ++ke)
        for (int s = 0; s < QuadratureRule::n_edge; ++s) {
          const double zo = std::clamp(zt.edge_own(ke, s), 0.0, 1.0);
          const double zn = std::clamp(zt.edge_nb(ke, s), 0.0, 1.0);
          f.advw_edge_own(ke, s) = (injected ? zo : 1.0 - zo) * rc;
          f.advw_edge_nb(ke, s) = (injected ? zn : 1.0 - zn) * rc;
          double zin = zo;
          if (z_inflow && m.edges[ke].is_boundary())
            zin = std::clamp(
                z_inflow(m.edge_point(m.edges[ke], q.edge_x[s]), t_next), 0.0, 1.0);
          f.advw_edge_in(ke, s) = (injected ? zin : 1.0 - zin) * rc;
        }
    }
    f.alpha = alpha;
    f.theta = theta;
    return f;
  };

  FieldCoefficients fi = fluid(true);
  fi.bc = std::move(bcs[0]);
  fi.source = std::move(sources[0]);
  FieldCoefficients fr = fluid(false);
  fr.bc = std::move(bcs[1]);
  fr.source = std::move(sources[1]);

  FieldCoefficients fs;
  fs.capacity = constant_cells(m, p.C_s());
  fs.lambda = constant_cells(m, p.lambda_s_eff());
  fs.lambda_edge_own = constant_edges(m, p.lambda_s_eff());
  fs.lambda_edge_nb = constant_edges(m, p.lambda_s_eff());
  fs.alpha = alpha;
  fs.theta = theta;
  fs.bc = std::move(bcs[2]);
  fs.source = std::move(sources[2]);

  auto exch = [&](auto f) {
    Eigen::ArrayXXd c(m.n_cells(), QuadratureRule::n_cell);
    for (int e = 0; e < m.n_cells(); ++e)
      for (int k = 0; k < QuadratureRule::n_cell; ++k) c(e, k) = f(zt.cell(e, k));
    return c;
  };

  prob.fields.push_back(std::move(fi));
  prob.fields.push_back(std::move(fr));
  prob.fields.push_back(std::move(fs));
  prob.exchanges.push_back({0, 2, exch([&](double zv) { return p.Lambda_is(zv); })});
  prob.exchanges.push_back({1, 2, exch([&](double zv) { return p.Lambda_rs(zv); })});
  prob.exchanges.push_back({0, 1, exch([&](double zv) { return p.Lambda_ir(zv); })});
  return prob;
}

HeatProblem bind_three_constant(const StructuredMesh& m, const VelocityField* vel,
                                double lambda_eff, double exchange,
                                std::array<HeatFieldBC, 3> bcs,
                                std::array<TimeField, 3> sources, double alpha,
                                double theta) {
  HeatProblem prob;
  prob.vel = vel;
  for (int f = 0; f < 3; ++f) {
    FieldCoefficients fc;
    fc.capacity = constant_cells(m, 1.0);
    fc.lambda = constant_cells(m, lambda_eff);
    fc.lambda_edge_own = constant_edges(m, lambda_eff);
    fc.lambda_edge_nb = constant_edges(m, lambda_eff);
    if (vel && f < 2) {
      fc.adv_weight = constant_cells(m, 1.0);
      fc.advw_edge_own = constant_edges(m, 1.0);
      fc.advw_edge_nb = constant_edges(m, 1.0);
      fc.advw_edge_in = constant_edges(m, 1.0);
    }
    fc.alpha = alpha;
    fc.theta = theta;
    fc.bc = std::move(bcs[f]);
    fc.source = std::move(sources[f]);
    prob.fields.push_back(std::move(fc));
  }
  prob.exchanges.push_back({0, 2, constant_cells(m, exchange)});
  prob.exchanges.push_back({1, 2, constant_cells(m, exchange)});
  prob.exchanges.push_back({0, 1, constant_cells(m, exchange)});
  return prob;
}

HeatStepper::HeatStepper(const StructuredMesh& mesh, int nf, SolverConfig solver,
                         bool coefficients_static)
    : mesh_(mesh),
      system_(mesh, nf),
      solver_be_(solver),
      solver_bdf2_(solver),
      static_coeffs_(coefficients_static) {}

TemperatureState HeatStepper::step(const TemperatureState& state,
                                   const ProblemBuilder& build, double dt) {
  const double t_next = state.time + dt;
  const TimeScheme scheme = (!force_backward_euler && state.history_depth >= 1)
                                ? TimeScheme::BDF2
                                : TimeScheme::BE;
  HeatProblem prob = build(t_next);
  system_.assemble(prob, state, dt, scheme, t_next);

  LinearSolver& solver = scheme == TimeScheme::BE ? solver_be_ : solver_bdf2_;
  bool& ready = scheme == TimeScheme::BE ? be_ready_ : bdf2_ready_;
  if (!static_coeffs_ || !ready) {
    solver.set_matrix(system_.matrix());
    ready = true;
  }

  Eigen::VectorXd guess = system_.pack(state.fields);
  Eigen::VectorXd x;
  last_report_ = solver.solve(system_.rhs(), x, &guess);
  total_iterations_ += last_report_.iterations;

  TemperatureState out;
  out.kind = state.kind;
  out.fields = system_.unpack(x);
  out.prev = state.fields;
  if (state.history_depth >= 1) out.prev2 = state.prev;
  out.history_depth = std::min(2, state.history_depth + 1);
  out.time = t_next;
  return out;
}

EGFunction mixture_temperature(const TemperatureState& s, const ThermalParameters& p) {
  require(s.kind == ModelKind::TwoTemp,
          "mixture_temperature: defined for the two-temperature model");
  const double cf = p.C_f(), cs = p.C_s();
  EGFunction out;
  out.cg = (cf * s.fields[0].cg + cs * s.fields[1].cg) / (cf + cs);
  out.dg = (cf * s.fields[0].dg + cs * s.fields[1].dg) / (cf + cs);
  return out;
}

EGFunction temperature_gap(const TemperatureState& s, bool solid_minus_fluid) {
  require(s.kind == ModelKind::TwoTemp,
          "temperature_gap: defined for the two-temperature model");
  EGFunction out;
  const double sgn = solid_minus_fluid ? -1.0 : 1.0;
  out.cg = sgn * (s.fields[0].cg - s.fields[1].cg);
  out.dg = sgn * (s.fields[0].dg - s.fields[1].dg);
  return out;
}

Eigen::VectorXd vertex_values(const StructuredMesh& m, const EGFunction& f) {
  Eigen::VectorXd out = f.cg;
  if (f.dg.size() == 0) return out;
  for (int v = 0; v < m.n_vertices(); ++v) {
    const auto& cells = m.conn.cells_of_vertex[v];
    double acc = 0.0;
    for (int e : cells) acc += f.dg[e];
    out[v] += cells.empty() ? 0.0 : acc / static_cast<double>(cells.size());
  }
  return out;
}

EGFunction mixed_fluid_temperature_nodal(const StructuredMesh& m,
                                         const TemperatureState& s, const EGFunction& z) {
  require(s.kind == ModelKind::ThreeWay,
          "mixed_fluid_temperature: defined for the three-way model");
  Eigen::VectorXd zv = vertex_values(m, z);
  Eigen::VectorXd ti = vertex_values(m, s.fields[0]);
  Eigen::VectorXd tr = vertex_values(m, s.fields[1]);
  EGFunction out = EGFunction::zero(m);
  out.cg = zv.array() * ti.array() + (1.0 - zv.array()) * tr.array();
  return out;
}

double mixed_fluid_temperature_at(const StructuredMesh& m, const TemperatureState& s,
                                  const EGFunction& z, int cell, double xi, double eta) {
  const double zv = evaluate(m, z, cell, xi, eta);
  return zv * evaluate(m, s.fields[0], cell, xi, eta) +
         (1.0 - zv) * evaluate(m, s.fields[1], cell, xi, eta);
}

double total_enthalpy(const StructuredMesh& m, const TemperatureState& s,
                      const ThermalParameters& p, const EGFunction& z) {
  require(s.kind == ModelKind::ThreeWay, "total_enthalpy: three-way model only");
  const auto& q = quadrature();
  const double area = m.hx * m.hy;
  double acc = 0.0;
  for (int e = 0; e < m.n_cells(); ++e)
    for (int k = 0; k < QuadratureRule::n_cell; ++k) {
      const double zv = evaluate(m, z, e, q.cell_x[k], q.cell_y[k]);
      const double ti = evaluate(m, s.fields[0], e, q.cell_x[k], q.cell_y[k]);
      const double tr = evaluate(m, s.fields[1], e, q.cell_x[k], q.cell_y[k]);
      const double ts = evaluate(m, s.fields[2], e, q.cell_x[k], q.cell_y[k]);
      acc += q.cell_w[k] * area *
             (p.C_i(zv) * ti + p.C_r(zv) * tr + p.C_s() * ts);
    }
  return acc;
}

}  // namespace geotherm
