#include "ictm/fem.hpp"

#include <Eigen/Dense>
#include <Eigen/IterativeLinearSolvers>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace ictm {

namespace {

using Offset = std::array<int, 3>;

// Vertex offsets (in cells) of each element orientation.
std::vector<std::vector<Offset>> element_shapes(int dim) {
    if (dim == 2) {
        return {{{0, 0, 0}, {1, 0, 0}, {1, 1, 0}}, {{0, 0, 0}, {1, 1, 0}, {0, 1, 0}}};
    }
    std::vector<std::vector<Offset>> shapes;
    std::array<int, 3> perm{0, 1, 2};
    do {
        Offset v{0, 0, 0};
        std::vector<Offset> tet{v};
        for (int step = 0; step < 3; ++step) {
            v[perm[step]] += 1;
            tet.push_back(v);
        }
        shapes.push_back(tet);
    } while (std::next_permutation(perm.begin(), perm.end()));
    return shapes;
}

}  // namespace

Triangulation::Triangulation(const GridSpec& grid) : grid_(grid) {
    const int dim = grid.dim();
    const auto shapes = element_shapes(dim);
    const int nv = dim + 1;

    double factorial = dim == 2 ? 2.0 : 6.0;
    element_volume_ = grid.cell_volume() / factorial;

    for (const auto& shape : shapes) {
        Eigen::MatrixXd edges(dim, dim);
        for (int l = 1; l <= dim; ++l)
            for (int a = 0; a < dim; ++a)
                edges(l - 1, a) = (shape[l][a] - shape[0][a]) * grid.h(a);
        const Eigen::MatrixXd inv = edges.inverse();
        std::array<std::array<double, 3>, 4> g{};
        for (int l = 1; l <= dim; ++l)
            for (int a = 0; a < dim; ++a) {
                g[l][a] = inv(a, l - 1);
                g[0][a] -= inv(a, l - 1);
            }
        gradients_.push_back(g);
    }

    const std::size_t cells = grid.cell_count();
    vertices_.reserve(cells * shapes.size() * nv);
    shape_.reserve(cells * shapes.size());
    const int mz = dim == 3 ? grid.cells(2) : 1;
    for (int k = 0; k < mz; ++k)
        for (int j = 0; j < grid.cells(1); ++j)
            for (int i = 0; i < grid.cells(0); ++i)
                for (std::size_t s = 0; s < shapes.size(); ++s) {
                    for (const auto& off : shapes[s])
                        vertices_.push_back(static_cast<std::int32_t>(
                            grid.index(i + off[0], j + off[1], k + off[2])));
                    shape_.push_back(static_cast<std::uint8_t>(s));
                }

    lumped_mass_.assign(grid.node_count(), 0.0);
    const double share = element_volume_ / nv;
    for (auto v : vertices_) lumped_mass_[v] += share;
}

std::array<double, 3> Triangulation::element_gradient(std::size_t e,
                                                      std::span<const double> u) const {
    std::array<double, 3> g{0.0, 0.0, 0.0};
    const auto verts = element(e);
    for (int l = 0; l < vertices_per_element(); ++l) {
        const auto& gl = gradient(e, l);
        const double ul = u[verts[l]];
        for (int a = 0; a < 3; ++a) g[a] += ul * gl[a];
    }
    return g;
}

BoundarySpec::BoundarySpec(const GridSpec& grid, std::vector<std::size_t> dirichlet_nodes)
    : nodes_(std::move(dirichlet_nodes)) {
    std::sort(nodes_.begin(), nodes_.end());
    nodes_.erase(std::unique(nodes_.begin(), nodes_.end()), nodes_.end());
    if (nodes_.empty())
        throw std::invalid_argument("Dirichlet node set is empty; the heat problem is singular");
    for (auto n : nodes_) {
        if (n >= grid.node_count() || !grid.on_boundary(n))
            throw std::invalid_argument("Dirichlet node " + std::to_string(n) +
                                        " is not a boundary node");
    }
}

Preconditioner parse_preconditioner(std::string_view s) {
    if (s == "jacobi") return Preconditioner::jacobi;
    if (s == "ichol" || s == "ichol-like") return Preconditioner::ichol;
    throw std::invalid_argument("unknown preconditioner '" + std::string(s) +
                                "' (expected jacobi|ichol)");
}

std::string_view to_string(Preconditioner p) {
    return p == Preconditioner::jacobi ? "jacobi" : "ichol";
}

void SolverSettings::validate() const {
    if (!(rel_tol > 0.0 && rel_tol <= 1e-4))
        throw std::invalid_argument("solver.rel_tol must lie in (0, 1e-4]");
    if (max_cg_iters < 0) throw std::invalid_argument("solver.max_cg_iters must be >= 1");
}

int SolverSettings::iteration_cap(const GridSpec& grid) const {
    if (max_cg_iters > 0) return max_cg_iters;
    const double n = static_cast<double>(grid.node_count());
    return static_cast<int>(std::ceil(20.0 * std::pow(n, 1.0 / grid.dim())));
}

namespace {

std::vector<int> make_free_index(const GridSpec& grid, const BoundarySpec& bc,
                                 std::vector<std::size_t>* free_nodes = nullptr) {
    std::vector<int> idx(grid.node_count(), 0);
    for (auto n : bc.dirichlet_nodes()) idx[n] = -1;
    int next = 0;
    for (std::size_t n = 0; n < idx.size(); ++n) {
        if (idx[n] < 0) continue;
        idx[n] = next++;
        if (free_nodes) free_nodes->push_back(n);
    }
    return idx;
}

double element_kappa(const Triangulation& tri, std::size_t e, std::span<const double> kappa) {
    double s = 0.0;
    for (auto v : tri.element(e)) s += kappa[v];
    return s / tri.vertices_per_element();
}

void check_kappa(std::span<const double> kappa) {
    for (double k : kappa)
        if (!(k > 0.0) || !std::isfinite(k))
            throw std::invalid_argument("conductivity must be positive and finite");
}

}  // namespace

StiffnessMatrix assemble_stiffness(const Triangulation& tri, const BoundarySpec& bc,
                                   const ScalarField& kappa) {
    require_same_grid(tri.grid(), kappa.grid(), "assemble_stiffness");
    check_kappa(kappa.values());
    const int nv = tri.vertices_per_element();
    const auto n = static_cast<int>(tri.grid().node_count());

    StiffnessMatrix out;
    out.free_index = make_free_index(tri.grid(), bc);
    const int n_free = n - static_cast<int>(bc.size());

    std::vector<Eigen::Triplet<double, int>> full, reduced;
    full.reserve(tri.element_count() * nv * nv);
    for (std::size_t e = 0; e < tri.element_count(); ++e) {
        const double ke = element_kappa(tri, e, kappa.values()) * tri.element_volume();
        const auto verts = tri.element(e);
        for (int a = 0; a < nv; ++a)
            for (int b = 0; b < nv; ++b) {
                const auto& ga = tri.gradient(e, a);
                const auto& gb = tri.gradient(e, b);
                const double v = ke * (ga[0] * gb[0] + ga[1] * gb[1] + ga[2] * gb[2]);
                full.emplace_back(verts[a], verts[b], v);
                const int fa = out.free_index[verts[a]], fb = out.free_index[verts[b]];
                if (fa >= 0 && fb >= 0) reduced.emplace_back(fa, fb, v);
            }
    }
    out.full.resize(n, n);
    out.full.setFromTriplets(full.begin(), full.end());
    out.reduced.resize(n_free, n_free);
    out.reduced.setFromTriplets(reduced.begin(), reduced.end());
    return out;
}

HeatSolver::HeatSolver(const Triangulation& tri, const BoundarySpec& bc, SolverSettings settings)
    : tri_(&tri), bc_(bc), settings_(settings) {
    settings_.validate();
    free_index_ = make_free_index(tri.grid(), bc_, &free_nodes_);
    const int nv = tri.vertices_per_element();
    const auto n_free = static_cast<int>(free_nodes_.size());

    std::vector<Eigen::Triplet<double, int>> trips;
    trips.reserve(tri.element_count() * nv * nv);
    for (std::size_t e = 0; e < tri.element_count(); ++e) {
        const auto verts = tri.element(e);
        for (int a = 0; a < nv; ++a)
            for (int b = 0; b < nv; ++b) {
                const int fa = free_index_[verts[a]], fb = free_index_[verts[b]];
                if (fa >= 0 && fb >= 0) trips.emplace_back(fa, fb, 1.0);
            }
    }
    pattern_.resize(n_free, n_free);
    pattern_.setFromTriplets(trips.begin(), trips.end());
    pattern_.makeCompressed();

    scatter_.assign(tri.element_count() * nv * nv, -1);
    const int* outer = pattern_.outerIndexPtr();
    const int* inner = pattern_.innerIndexPtr();
    for (std::size_t e = 0; e < tri.element_count(); ++e) {
        const auto verts = tri.element(e);
        for (int a = 0; a < nv; ++a)
            for (int b = 0; b < nv; ++b) {
                const int fa = free_index_[verts[a]], fb = free_index_[verts[b]];
                if (fa < 0 || fb < 0) continue;
                const int* first = inner + outer[fb];
                const int* last = inner + outer[fb + 1];
                const int* pos = std::lower_bound(first, last, fa);
                scatter_[(e * nv + a) * nv + b] = static_cast<int>(pos - inner);
            }
    }
    std::fill(pattern_.valuePtr(), pattern_.valuePtr() + pattern_.nonZeros(), 0.0);
}

SparseMatrix HeatSolver::assemble(std::span<const double> kappa) const {
    if (kappa.size() != tri_->grid().node_count())
        throw std::invalid_argument("conductivity field size does not match the mesh");
    check_kappa(kappa);
    const int nv = tri_->vertices_per_element();

    SparseMatrix k = pattern_;
    double* values = k.valuePtr();
    for (std::size_t e = 0; e < tri_->element_count(); ++e) {
        const double ke = element_kappa(*tri_, e, kappa) * tri_->element_volume();
        for (int a = 0; a < nv; ++a) {
            const auto& ga = tri_->gradient(e, a);
            for (int b = 0; b < nv; ++b) {
                const int slot = scatter_[(e * nv + a) * nv + b];
                if (slot < 0) continue;
                const auto& gb = tri_->gradient(e, b);
                values[slot] += ke * (ga[0] * gb[0] + ga[1] * gb[1] + ga[2] * gb[2]);
            }
        }
    }
    return k;
}

namespace {

template <typename Precond>
Eigen::VectorXd run_cg(const SparseMatrix& k, const Eigen::VectorXd& b, const Eigen::VectorXd& x0,
                       double tol, int max_iters, int& iterations) {
    Eigen::ConjugateGradient<SparseMatrix, Eigen::Lower | Eigen::Upper, Precond> cg;
    cg.setTolerance(tol);
    cg.setMaxIterations(max_iters);
    cg.compute(k);
    if (cg.info() != Eigen::Success)
        throw SolverError("preconditioner setup failed", std::nan(""), 0);
    Eigen::VectorXd x = cg.solveWithGuess(b, x0);
    iterations = static_cast<int>(cg.iterations());
    if (cg.info() != Eigen::Success) {
        std::ostringstream msg;
        msg << "CG did not converge in " << cg.iterations() << " iterations (relative residual "
            << cg.error() << ", target " << tol << ")";
        throw SolverError(msg.str(), cg.error(), iterations);
    }
    return x;
}

}  // namespace

std::vector<double> HeatSolver::solve(const SparseMatrix& k, std::span<const double> rhs_free,
                                      std::span<const double> guess) const {
    const auto n_free = static_cast<Eigen::Index>(free_nodes_.size());
    if (static_cast<Eigen::Index>(rhs_free.size()) != n_free)
        throw std::invalid_argument("right-hand side size does not match the free node count");

    Eigen::Map<const Eigen::VectorXd> b(rhs_free.data(), n_free);
    std::vector<double> out(tri_->grid().node_count(), 0.0);
    if (b.squaredNorm() == 0.0) {
        last_iterations_ = 0;
        return out;
    }
    Eigen::VectorXd x0 = Eigen::VectorXd::Zero(n_free);
    if (!guess.empty()) {
        for (Eigen::Index i = 0; i < n_free; ++i) x0[i] = guess[free_nodes_[i]];
    }
    const int cap = settings_.iteration_cap(tri_->grid());
    int iters = 0;
    Eigen::VectorXd x =
        settings_.preconditioner == Preconditioner::jacobi
            ? run_cg<Eigen::DiagonalPreconditioner<double>>(k, b, x0, settings_.rel_tol, cap, iters)
            : run_cg<Eigen::IncompleteCholesky<double, Eigen::Lower, Eigen::NaturalOrdering<int>>>(
                  k, b, x0, settings_.rel_tol, cap, iters);
    last_iterations_ = iters;
    for (Eigen::Index i = 0; i < n_free; ++i) out[free_nodes_[i]] = x[i];
    return out;
}

std::vector<double> HeatSolver::load(std::span<const double> q) const {
    const auto mass = tri_->lumped_mass();
    std::vector<double> b(free_nodes_.size());
    for (std::size_t i = 0; i < free_nodes_.size(); ++i) b[i] = mass[free_nodes_[i]] * q[free_nodes_[i]];
    return b;
}

std::vector<double> HeatSolver::apply(const SparseMatrix& k, std::span<const double> u) const {
    Eigen::VectorXd uf(static_cast<Eigen::Index>(free_nodes_.size()));
    for (std::size_t i = 0; i < free_nodes_.size(); ++i) uf[i] = u[free_nodes_[i]];
    Eigen::VectorXd ku = k * uf;
    return {ku.data(), ku.data() + ku.size()};
}

double HeatSolver::energy(const SparseMatrix& k, std::span<const double> u) const {
    const auto ku = apply(k, u);
    double s = 0.0;
    for (std::size_t i = 0; i < free_nodes_.size(); ++i) s += ku[i] * u[free_nodes_[i]];
    return s;
}

ScalarField solve_state(const Triangulation& tri, const BoundarySpec& bc,
                        const ScalarField& kappa, const ScalarField& q,
                        const SolverSettings& s) {
    require_same_grid(tri.grid(), kappa.grid(), "solve_state");
    require_same_grid(tri.grid(), q.grid(), "solve_state");
    HeatSolver solver(tri, bc, s);
    const auto k = solver.assemble(kappa.values());
    return ScalarField(tri.grid(), solver.solve(k, solver.load(q.values())));
}

ScalarField solve_adjoint(const Triangulation& tri, const BoundarySpec& bc,
                          const ScalarField& kappa, const ScalarField& q, const ScalarField& t,
                          double xi, const SolverSettings& s) {
    require_same_grid(tri.grid(), t.grid(), "solve_adjoint");
    require_same_grid(tri.grid(), q.grid(), "solve_adjoint");
    HeatSolver solver(tri, bc, s);
    const auto k = solver.assemble(kappa.values());
    auto rhs = solver.load(q.values());
    const auto kt = solver.apply(k, t.values());
    for (std::size_t i = 0; i < rhs.size(); ++i) rhs[i] = -(rhs[i] + xi * kt[i]);
    return ScalarField(tri.grid(), solver.solve(k, rhs));
}

std::vector<double> gradient_product_values(const Triangulation& tri, std::span<const double> t,
                                            std::span<const double> t_adj, double xi) {
    const auto n = tri.grid().node_count();
    if (t.size() != n || t_adj.size() != n)
        throw std::invalid_argument("field size does not match the mesh");
    std::vector<double> acc(n, 0.0), weight(n, 0.0);
    const double vol = tri.element_volume();
    for (std::size_t e = 0; e < tri.element_count(); ++e) {
        const auto gt = tri.element_gradient(e, t);
        const auto ga = tri.element_gradient(e, t_adj);
        const double g = 0.5 * xi * (gt[0] * gt[0] + gt[1] * gt[1] + gt[2] * gt[2]) +
                         (gt[0] * ga[0] + gt[1] * ga[1] + gt[2] * ga[2]);
        for (auto v : tri.element(e)) {
            acc[v] += g * vol;
            weight[v] += vol;
        }
    }
    for (std::size_t i = 0; i < n; ++i) acc[i] /= weight[i];
    return acc;
}

ScalarField gradient_product_field(const Triangulation& tri, const ScalarField& t,
                                   const ScalarField& t_adj, double xi) {
    require_same_grid(tri.grid(), t.grid(), "gradient_product_field");
    require_same_grid(tri.grid(), t_adj.grid(), "gradient_product_field");
    return ScalarField(tri.grid(), gradient_product_values(tri, t.values(), t_adj.values(), xi));
}

}  // namespace ictm
