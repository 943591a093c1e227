#include "tmkernel/diagnostics.hpp"
#include "tmkernel/dynamics.hpp"
#include "tmkernel/error.hpp"
#include "tmkernel/kernels.hpp"
#include "tmkernel/manifold.hpp"
#include "tmkernel/oracle.hpp"
#include "tmkernel/parallel.hpp"
#include "tmkernel/whitney.hpp"

#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>

namespace py = pybind11;
using namespace tmkernel;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

BurstEnsemble make_ensemble(Array samples, const RowMatrix& points, double tau) {
    if (samples.ndim() != 3) throw ValidationError("samples must have shape (N, M, n)");
    BurstEnsemble ens;
    ens.num_points = static_cast<std::size_t>(samples.shape(0));
    ens.samples_per_point = static_cast<std::size_t>(samples.shape(1));
    ens.dim = static_cast<std::size_t>(samples.shape(2));
    ens.samples.assign(samples.data(), samples.data() + samples.size());
    ens.points = points;
    ens.tau = tau;
    if (points.size() == 0) ens.points = ens.burst_means();
    ens.validate();
    return ens;
}

Array samples_array(const BurstEnsemble& ens) {
    Array out({ens.num_points, ens.samples_per_point, ens.dim});
    std::copy(ens.samples.begin(), ens.samples.end(), out.mutable_data());
    return out;
}

SymmetricMatrix symmetric(const Matrix& m, MatrixKind kind) { return SymmetricMatrix::from_dense(m, kind); }

Region region_from(const std::vector<double>& ball) {
    if (ball.size() < 2) throw ValidationError("a region is given as (c_1, ..., c_n, radius)");
    return Region::ball({ball.begin(), ball.end() - 1}, ball.back());
}

py::dict field_dict(const GridField& f) {
    py::dict d;
    d["values"] = f.values;
    d["shape"] = f.grid.shape;
    d["centers"] = RowMatrix(f.grid.centers());
    d["lo"] = f.grid.box.lo;
    d["hi"] = f.grid.box.hi;
    return d;
}

py::dict report_dict(const DistortionReport& r) {
    py::dict d;
    d["contraction"] = r.contraction;
    d["expansion"] = r.expansion;
    d["distortion"] = r.distortion;
    d["contraction_pair"] = r.contraction_pair;
    d["expansion_pair"] = r.expansion_pair;
    d["pairs_used"] = r.pairs_used;
    d["pairs_skipped"] = r.pairs_skipped;
    d["floor"] = r.floor;
    return d;
}

}  // namespace

PYBIND11_MODULE(_tmkernel, m) {
    m.doc() = "Transition-manifold reaction coordinates from burst simulations";

    static py::exception<Error> base(m, "Error", PyExc_RuntimeError);
    static py::exception<ValidationError> validation(m, "ValidationError", PyExc_ValueError);
    static py::exception<NumericalError> numerical(m, "NumericalError", base.ptr());
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const ValidationError& e) {
            py::set_error(validation, e.what());
        } catch (const NumericalError& e) {
            py::set_error(numerical, e.what());
        } catch (const Error& e) {
            py::set_error(base, e.what());
        }
    });

    m.def("set_num_threads", &set_num_threads, py::arg("threads"));

    py::class_<PotentialModel>(m, "Potential")
        .def(py::init([](const std::string& name) { return potential_by_name(name); }), py::arg("name"))
        .def_property_readonly("name", &PotentialModel::name)
        .def_property_readonly("dim", &PotentialModel::dim)
        .def_property_readonly("domain", [](const PotentialModel& p) { return py::make_tuple(p.domain().lo, p.domain().hi); })
        .def("energy", [](const PotentialModel& p, std::vector<double> x) { return p.energy(x); })
        .def("gradient", [](const PotentialModel& p, std::vector<double> x) { return p.gradient(x); });

    py::class_<BurstEnsemble>(m, "Bursts")
        .def(py::init(&make_ensemble), py::arg("samples"), py::arg("points") = RowMatrix(), py::arg("tau") = 0.0)
        .def_property_readonly("samples", &samples_array)
        .def_property_readonly("points", [](const BurstEnsemble& e) { return e.points; })
        .def_readonly("tau", &BurstEnsemble::tau)
        .def_property_readonly("num_points", [](const BurstEnsemble& e) { return e.num_points; })
        .def_property_readonly("samples_per_point", [](const BurstEnsemble& e) { return e.samples_per_point; })
        .def_property_readonly("dim", [](const BurstEnsemble& e) { return e.dim; });

    m.def(
        "sample_bursts",
        [](const PotentialModel& pot, const RowMatrix& points, std::size_t samples, double beta, double dt, double tau,
           std::uint64_t seed) {
            SdeConfig cfg{beta, dt, tau, seed, false};
            cfg.validate();
            py::gil_scoped_release release;
            return sample_bursts(pot, cfg, points, samples);
        },
        py::arg("potential"), py::arg("points"), py::arg("samples"), py::arg("beta"), py::arg("dt"), py::arg("tau"),
        py::arg("seed") = 1);

    m.def(
        "grid_points", [](const PotentialModel& pot, std::vector<std::size_t> shape) { return test_points_grid(pot.domain(), shape); },
        py::arg("potential"), py::arg("shape"));

    m.def(
        "empirical_gram",
        [](const BurstEnsemble& ens, const std::string& kernel) {
            const auto k = KernelSpec::parse(kernel);
            py::gil_scoped_release release;
            return empirical_gram(ens, k).to_dense();
        },
        py::arg("bursts"), py::arg("kernel"), "Gram matrix of the embedded empirical densities; kernel is 'linear', "
                                              "'polynomial:<p>' or 'gaussian:<sigma>'.");

    m.def(
        "kernel_distance",
        [](const Matrix& gram, bool squared) {
            const auto d = kernel_distance(symmetric(gram, MatrixKind::gram));
            return squared ? d.to_dense() : plain_distance(d).to_dense();
        },
        py::arg("gram"), py::arg("squared") = false);

    m.def(
        "whitney_embed",
        [](const BurstEnsemble& ens, const RowMatrix& a) { return whitney_embed(ens, explicit_feature_matrix(a)); },
        py::arg("bursts"), py::arg("features"));
    m.def("euclidean_distances", [](const RowMatrix& z) { return euclidean_distance_matrix(z).to_dense(); }, py::arg("coords"));

    m.def(
        "diffusion_maps",
        [](const Matrix& d, double bandwidth, std::size_t components) {
            const auto e = diffusion_maps(symmetric(d, MatrixKind::distance), bandwidth, components);
            return py::make_tuple(e.coords, e.eigenvalues);
        },
        py::arg("distances"), py::arg("bandwidth"), py::arg("components") = 2);
    m.def(
        "classical_mds",
        [](const Matrix& d, std::size_t k) {
            const auto e = classical_mds(symmetric(d, MatrixKind::distance), k);
            return py::make_tuple(e.coords, e.eigenvalues);
        },
        py::arg("distances"), py::arg("components") = 2);

    m.def(
        "distortion",
        [](const Matrix& ref, const Matrix& emb, std::optional<double> floor) {
            const auto r = symmetric(ref, MatrixKind::distance);
            return report_dict(distortion(r, symmetric(emb, MatrixKind::distance), floor ? *floor : default_distance_floor(r)));
        },
        py::arg("reference"), py::arg("embedded"), py::arg("floor") = py::none());
    m.def("rc_quality", &rc_quality, py::arg("xi"), py::arg("psi"), py::arg("bins") = 20);
    m.def(
        "spearman", [](std::vector<double> a, std::vector<double> b) { return spearman(a, b); }, py::arg("a"), py::arg("b"));

    m.def(
        "invariant_density",
        [](const PotentialModel& pot, double beta, std::vector<std::size_t> shape) {
            return field_dict(invariant_density(pot, beta, Grid(pot.domain(), shape)));
        },
        py::arg("potential"), py::arg("beta"), py::arg("shape"));
    m.def(
        "committor",
        [](const PotentialModel& pot, double beta, std::vector<std::size_t> shape, std::vector<double> a,
           std::vector<double> b) {
            return field_dict(committor(pot, beta, Grid(pot.domain(), shape), region_from(a), region_from(b)));
        },
        py::arg("potential"), py::arg("beta"), py::arg("shape"), py::arg("a"), py::arg("b"),
        "Committor on a cell grid; regions are balls given as (c_1, ..., c_n, radius).");
    m.def(
        "generator_eigs",
        [](const PotentialModel& pot, double beta, std::vector<std::size_t> shape, std::size_t count) {
            py::list out;
            for (const auto& p : generator_eigs(pot, beta, Grid(pot.domain(), shape), count)) {
                py::dict d;
                d["rate"] = p.rate;
                d["psi"] = p.density_mode.values;
                d["phi"] = p.function_mode.values;
                out.append(d);
            }
            return out;
        },
        py::arg("potential"), py::arg("beta"), py::arg("shape"), py::arg("count") = 3);
}
