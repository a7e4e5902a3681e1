// SPDX-License-Identifier: Apache-2.0
//
// mpcal - in-situ multiport VNA calibration for microwave imaging systems
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#include "mpcal/cli.hpp"
#include "mpcal/error_model.hpp"
#include "mpcal/net.hpp"
#include "mpcal/touchstone.hpp"

#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

namespace py = pybind11;
namespace ts = mpcal::touchstone;
using mpcal::Complex;

namespace
{

using ComplexArray = py::array_t<Complex, py::array::c_style | py::array::forcecast>;

ts::FreqUnit unit_from(const std::string &s)
{
    if (s == "HZ" || s == "Hz")
        return ts::FreqUnit::Hz;
    if (s == "KHZ" || s == "kHz")
        return ts::FreqUnit::KHz;
    if (s == "MHZ" || s == "MHz")
        return ts::FreqUnit::MHz;
    if (s == "GHZ" || s == "GHz")
        return ts::FreqUnit::GHz;
    throw py::value_error("unknown frequency unit '" + s + "'");
}

ts::Format format_from(const std::string &s)
{
    if (s == "RI" || s == "ri")
        return ts::Format::RI;
    if (s == "MA" || s == "ma")
        return ts::Format::MA;
    if (s == "DB" || s == "db")
        return ts::Format::DB;
    throw py::value_error("unknown data format '" + s + "'");
}

// (K, n, n) complex array <-> network.
mpcal::NPortNetwork to_network(const std::vector<double> &freqs, const ComplexArray &s, double z0)
{
    if (s.ndim() != 3 || s.shape(1) != s.shape(2))
        throw py::value_error("s must have shape (points, n, n)");
    if (static_cast<std::size_t>(s.shape(0)) != freqs.size())
        throw py::value_error("s and freqs disagree on the number of points");
    const auto n = static_cast<Eigen::Index>(s.shape(1));
    auto r = s.unchecked<3>();
    std::vector<Eigen::MatrixXcd> m(freqs.size(), Eigen::MatrixXcd(n, n));
    for (std::size_t k = 0; k < freqs.size(); ++k)
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index j = 0; j < n; ++j)
                m[k](i, j) = r(static_cast<py::ssize_t>(k), i, j);
    return mpcal::NPortNetwork(mpcal::FrequencyGrid(freqs), std::move(m), z0);
}

py::tuple from_network(const mpcal::NPortNetwork &net)
{
    const auto n = static_cast<py::ssize_t>(net.n_ports());
    ComplexArray s({static_cast<py::ssize_t>(net.size()), n, n});
    auto w = s.mutable_unchecked<3>();
    for (std::size_t k = 0; k < net.size(); ++k)
        for (py::ssize_t i = 0; i < n; ++i)
            for (py::ssize_t j = 0; j < n; ++j)
                w(static_cast<py::ssize_t>(k), i, j) = net.at(k)(i, j);
    const auto pts = net.grid().points();
    return py::make_tuple(std::vector<double>(pts.begin(), pts.end()), s, net.reference_impedance());
}

} // namespace

PYBIND11_MODULE(_mpcal, m)
{
    m.doc() = "In-situ multiport VNA calibration";

    static py::exception<mpcal::Error> error(m, "MpcalError", PyExc_RuntimeError);
    py::register_exception_translator([](std::exception_ptr p) {
        try
        {
            if (p)
                std::rethrow_exception(p);
        }
        catch (const mpcal::Error &e)
        {
            py::object exc = py::reinterpret_borrow<py::object>(error.ptr())(e.what());
            exc.attr("code") = std::string(mpcal::errc_name(e.code()));
            PyErr_SetObject(error.ptr(), exc.ptr());
        }
    });

    m.def("s_to_t", py::overload_cast<const Eigen::Matrix2cd &>(&mpcal::s_to_t), py::arg("s"),
          "Cascade (T) matrix of a 2x2 S-matrix.");
    m.def("t_to_s", py::overload_cast<const Eigen::Matrix2cd &>(&mpcal::t_to_s), py::arg("t"));

    m.def("embed_reflection", py::overload_cast<Complex, Complex, Complex, Complex>(&mpcal::embed_reflection),
          py::arg("e00"), py::arg("e11"), py::arg("p"), py::arg("gamma"));
    m.def("correct_reflection", py::overload_cast<Complex, Complex, Complex, Complex>(&mpcal::correct_reflection),
          py::arg("e00"), py::arg("e11"), py::arg("p"), py::arg("gamma_measured"));

    m.def(
        "reduce_ports",
        [](const Eigen::MatrixXcd &s, const std::vector<std::size_t> &kept, Complex termination) {
            const mpcal::NPortNetwork net(mpcal::FrequencyGrid({1.0}), {s});
            return Eigen::MatrixXcd(mpcal::reduce_ports(net, kept, termination).at(0));
        },
        py::arg("s"), py::arg("kept"), py::arg("termination") = Complex(0.0),
        "Single-frequency port reduction with every inactive port terminated in `termination`.");

    m.def(
        "parse_touchstone", [](const std::string &text) { return from_network(ts::parse(text)); }, py::arg("text"),
        "Returns (freqs_hz, s[points, n, n], z0).");
    m.def(
        "write_touchstone",
        [](const std::vector<double> &freqs, const ComplexArray &s, const std::string &unit, const std::string &fmt,
           double z0) { return ts::write(to_network(freqs, s, z0), {unit_from(unit), format_from(fmt), z0}); },
        py::arg("freqs"), py::arg("s"), py::arg("unit") = "GHZ", py::arg("fmt") = "MA", py::arg("z0") = 50.0);

    m.def(
        "run_cli",
        [](const std::vector<std::string> &args) {
            std::ostringstream out, err;
            int code = 0;
            {
                py::gil_scoped_release release;
                code = mpcal::cli::run(args, out, err);
            }
            return py::make_tuple(code, out.str(), err.str());
        },
        py::arg("args"), "Run the command-line front end in-process; returns (exit_code, stdout, stderr).");
}
