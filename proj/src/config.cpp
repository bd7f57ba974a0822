#include "blobflow/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "blobflow/reference.hpp"

namespace blob::cfg {

namespace {

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

const std::set<std::string>& known_keys() {
    static const std::set<std::string> keys = {
        "kernel.family", "kernel.k", "kernel.alpha", "kernel.epsilon", "kernel.dim",
        "lift.p",
        "problem.equation", "problem.sigma", "problem.m", "problem.sigma_prefactor",
        "problem.c_lambda",
        "potential.kind", "potential.scale", "potential.coeffs",
        "quad.n", "quad.tail_tol", "quad.entropy_nodes", "quad.entropy_panels_per_eps",
        "quad.grade", "quad.c_stab",
        "sim.T", "sim.dt", "sim.method", "sim.snapshot_every", "sim.with_energy",
        "init.kind", "init.s0", "init.t0", "init.a", "init.b", "init.n", "init.path",
        "init.grid_lo", "init.grid_hi", "init.grid_n",
        "study.N", "study.epsilon", "study.sigma", "study.checkpoints", "study.gamma",
        "study.kind",
        "jko.M", "jko.tau", "jko.steps", "jko.tol", "jko.max_iters",
        "gibbs.checkpoints",
        "validate.samples", "validate.norm_scale", "validate.log_global_c",
        "validate.fast_power_c", "validate.commutator_cstar",
        "output.dir", "seed",
    };
    return keys;
}

}  // namespace

RunConfig RunConfig::parse_string(const std::string& text) {
    RunConfig c;
    std::istringstream in(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find_first_of("#;");
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw invalid_parameter("config line " + std::to_string(lineno) + ": bad section");
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw invalid_parameter("config line " + std::to_string(lineno) + ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) throw invalid_parameter("config line " + std::to_string(lineno) + ": empty key");
        c.kv[section.empty() ? key : section + "." + key] = value;
    }
    return c;
}

RunConfig RunConfig::parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw invalid_parameter("config: cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_string(ss.str());
}

std::string RunConfig::get_str(const std::string& key, const std::string& fallback) const {
    const auto it = kv.find(key);
    return it == kv.end() ? fallback : it->second;
}

double RunConfig::get_num(const std::string& key, double fallback) const {
    const auto it = kv.find(key);
    if (it == kv.end()) return fallback;
    try {
        size_t pos = 0;
        const double v = std::stod(it->second, &pos);
        if (pos != it->second.size()) throw std::invalid_argument("trailing");
        return v;
    } catch (const std::exception&) {
        throw invalid_parameter("config: " + key + " is not a number: " + it->second);
    }
}

int RunConfig::get_int(const std::string& key, int fallback) const {
    const double v = get_num(key, fallback);
    if (v != std::floor(v)) throw invalid_parameter("config: " + key + " must be an integer");
    return static_cast<int>(v);
}

bool RunConfig::get_bool(const std::string& key, bool fallback) const {
    const auto it = kv.find(key);
    if (it == kv.end()) return fallback;
    if (it->second == "true" || it->second == "1") return true;
    if (it->second == "false" || it->second == "0") return false;
    throw invalid_parameter("config: " + key + " must be true/false");
}

std::vector<double> RunConfig::get_list(const std::string& key) const {
    const auto it = kv.find(key);
    std::vector<double> out;
    if (it == kv.end()) return out;
    std::istringstream ss(it->second);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        tok = trim(tok);
        if (tok.empty()) continue;
        try {
            out.push_back(std::stod(tok));
        } catch (const std::exception&) {
            throw invalid_parameter("config: bad list entry in " + key + ": " + tok);
        }
    }
    return out;
}

void RunConfig::validate_schema() const {
    for (const auto& [key, value] : kv) {
        (void)value;
        if (!known_keys().count(key))
            throw invalid_parameter("config: unknown key '" + key + "'");
    }
}

std::string RunConfig::serialize() const {
    // Group by section, sections and keys in sorted order.
    std::map<std::string, std::map<std::string, std::string>> sections;
    for (const auto& [key, value] : kv) {
        const auto dot = key.find('.');
        if (dot == std::string::npos)
            sections[""][key] = value;
        else
            sections[key.substr(0, dot)][key.substr(dot + 1)] = value;
    }
    std::ostringstream out;
    for (const auto& [section, entries] : sections) {
        if (!section.empty()) out << "[" << section << "]\n";
        for (const auto& [key, value] : entries) out << key << " = " << value << "\n";
        out << "\n";
    }
    return out.str();
}

MollifierKernel kernel_from(const RunConfig& c) {
    const std::string family = c.get_str("kernel.family", "polybump");
    const int dim = c.get_int("kernel.dim", 1);
    const double eps = c.get_num("kernel.epsilon", 0.3);
    if (family == "polybump")
        return MollifierKernel(KernelFamily::poly_bump(dim, c.get_int("kernel.k", 4)), eps);
    if (family == "exp1") return MollifierKernel(KernelFamily::exp_bracket(dim, 1), eps);
    if (family == "exp2") return MollifierKernel(KernelFamily::exp_bracket(dim, 2), eps);
    if (family == "barenblatt") {
        double alpha = c.get_num("kernel.alpha", 0.0);
        if (alpha == 0.0) {
            const double m = c.get_num("problem.m", 0.8);
            alpha = KernelFamily::barenblatt_alpha_for(m);
        }
        return MollifierKernel(KernelFamily::barenblatt(dim, alpha), eps);
    }
    throw invalid_parameter("config: kernel.family must be polybump|exp1|exp2|barenblatt");
}

ProblemSpec problem_from(const RunConfig& c) {
    const std::string equation = c.get_str("problem.equation", "heat");
    MollifierKernel kernel = kernel_from(c);
    const int dim = kernel.dim();

    std::variant<HeatEquation, FastDiffusion> eq;
    std::optional<MollifierKernel> lift;
    if (equation == "heat") {
        const double sigma = c.get_num("problem.sigma", 0.0);
        eq = HeatEquation{sigma};
        if (sigma > 0.0)
            lift = MollifierKernel(KernelFamily::exp_bracket(dim, c.get_int("lift.p", 1)), 1.0);
    } else if (equation == "fast") {
        eq = FastDiffusion{c.get_num("problem.m", 0.8)};
    } else {
        throw invalid_parameter("config: problem.equation must be heat|fast");
    }

    ExternalPotential pot;
    const std::string pk = c.get_str("potential.kind", "none");
    if (pk == "none")
        pot.kind = ExternalPotential::Kind::none;
    else if (pk == "quadratic")
        pot.kind = ExternalPotential::Kind::quadratic;
    else if (pk == "double_well")
        pot.kind = ExternalPotential::Kind::double_well;
    else if (pk == "poly") {
        pot.kind = ExternalPotential::Kind::poly;
        const auto coeffs = c.get_list("potential.coeffs");
        pot.coeffs = Eigen::Map<const Vec>(coeffs.data(), coeffs.size());
    } else {
        throw invalid_parameter("config: potential.kind must be none|quadratic|double_well|poly");
    }
    pot.scale = c.get_num("potential.scale", 1.0);

    QuadOptions q;
    q.n = c.get_int("quad.n", equation == "fast" ? 48 : 32);
    q.tail_tol = c.get_num("quad.tail_tol", 1e-10);
    q.entropy_nodes = c.get_int("quad.entropy_nodes", 10);
    q.entropy_panels_per_eps = c.get_num("quad.entropy_panels_per_eps", 4.0);
    q.grade = c.get_num("quad.grade", 1.25);
    q.c_stab = c.get_num("quad.c_stab", 0.1);

    ProblemSpec spec{eq, std::move(kernel), std::move(lift), pot,
                     c.get_bool("problem.sigma_prefactor", false), q,
                     c.get_num("problem.c_lambda", 1.0)};
    spec.validate();
    return spec;
}

ParticleState initial_state_from(const RunConfig& c, int dim) {
    const std::string kind = c.get_str("init.kind", "gaussian");
    const int n = c.get_int("init.n", 64);
    if (n < 1) throw invalid_parameter("config: init.n must be >= 1");
    if (kind == "file") {
        const std::string path = c.get_str("init.path", "");
        std::ifstream in(path);
        if (!in) throw invalid_parameter("config: cannot open init.path " + path);
        std::vector<double> vals;
        double v;
        while (in >> v) vals.push_back(v);
        if (vals.empty() || vals.size() % dim != 0)
            throw invalid_parameter("config: init file must hold N*dim numbers");
        ParticleState st;
        // File rows are particles; map with row-major layout.
        st.positions =
            Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
                vals.data(), static_cast<Eigen::Index>(vals.size()) / dim, dim);
        return st;
    }
    if (dim != 1)
        throw invalid_parameter("config: analytic initial data is quantized in d = 1 only");

    const int grid_n = c.get_int("init.grid_n", 20000);
    if (kind == "gaussian") {
        const double s0 = c.get_num("init.s0", 1.0);
        const double lo = c.get_num("init.grid_lo", -10.0 * s0);
        const double hi = c.get_num("init.grid_hi", 10.0 * s0);
        auto gauss = ref::GridDensity1D::from_function(
            [s0](double x) { return std::exp(-0.5 * x * x / (s0 * s0)); }, lo, hi, grid_n);
        return ref::quantize(gauss, n);
    }
    if (kind == "barenblatt") {
        const double t0 = c.get_num("init.t0", 1.0);
        const double m = c.get_num("problem.m", 0.8);
        const double mass_c = ref::barenblatt_mass_const(m, 1);
        const double lo = c.get_num("init.grid_lo", -60.0);
        const double hi = c.get_num("init.grid_hi", 60.0);
        auto prof = ref::GridDensity1D::from_function(
            [=](double x) { return ref::barenblatt_fast_1d(m, t0, mass_c, x); }, lo, hi, grid_n);
        return ref::quantize(prof, n);
    }
    if (kind == "uniform") {
        const double a = c.get_num("init.a", -1.0);
        const double b = c.get_num("init.b", 1.0);
        if (!(a < b)) throw invalid_parameter("config: init.a < init.b required");
        ParticleState st;
        st.positions.resize(n, 1);
        for (int j = 0; j < n; ++j) st.positions(j, 0) = a + (b - a) * (j + 0.5) / n;
        return st;
    }
    throw invalid_parameter("config: init.kind must be gaussian|barenblatt|uniform|file");
}

}  // namespace blob::cfg
