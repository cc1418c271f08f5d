#include "config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <fstream>
#include <set>
#include <sstream>

namespace waveapost::cli {

namespace pt = boost::property_tree;

namespace {

const std::map<std::string, std::set<std::string>>& known_keys() {
    static const std::map<std::string, std::set<std::string>> keys = {
        {"problem", {"case", "domain", "T", "a", "alpha_min", "alpha_max", "f", "u0", "u1", "exact"}},
        {"discretization", {"n", "steps", "degree", "load", "solver", "time_quad", "space_quad"}},
        {"estimator", {"C_el", "C_omega", "alpha_min", "time_quad", "space_quad"}},
        {"schedule", {}},
        {"output", {"csv", "breakdown", "element_map"}},
    };
    return keys;
}

template <typename T>
T get(const pt::ptree& tree, const std::string& path, T fallback) {
    const auto v = tree.get_optional<std::string>(path);
    if (!v) return fallback;
    std::istringstream in(*v);
    T out{};
    if (!(in >> out) || !(in >> std::ws).eof()) throw ConfigError("bad value for " + path + ": '" + *v + "'");
    return out;
}

std::string get_string(const pt::ptree& tree, const std::string& path, const std::string& fallback) {
    return tree.get<std::string>(path, fallback);
}

Expression expression(const pt::ptree& tree, const std::string& path, const std::string& fallback) {
    return Expression::parse(get_string(tree, path, fallback));
}

Domain parse_domain(const std::string& text) {
    std::istringstream in(text);
    std::string kind;
    in >> kind;
    double lx = 1.0, ly = 1.0;
    if (kind == "interval") {
        if (!(in >> lx)) lx = 1.0;
        return Domain::interval(lx);
    }
    if (kind == "rectangle") {
        if (!(in >> lx >> ly)) throw ConfigError("rectangle domain needs two extents");
        return Domain::rectangle(lx, ly);
    }
    throw ConfigError("unknown domain '" + text + "'");
}

std::pair<double, double> sampled_range(const CaseFunction& a, const Domain& d) {
    const int n = d.dim() == 1 ? 1024 : 64;
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (int i = 0; i <= n; ++i)
        for (int j = 0; j <= (d.dim() == 1 ? 0 : n); ++j) {
            const double v = a.value(d.lx * i / n, d.ly * j / n, 0.0);
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
    return {lo, hi};
}

void set_coefficient(ManufacturedCase& c, const Expression& a, const pt::ptree& tree) {
    if (a.depends_on('t')) throw ConfigError("the coefficient a must not depend on t");
    c.a = CaseFunction::from_expression(a);
    c.constant_a = a.is_constant();
    const auto [lo, hi] = sampled_range(c.a, c.domain);
    c.alpha_min = get(tree, "problem.alpha_min", lo);
    c.alpha_max = get(tree, "problem.alpha_max", hi);
    if (!(c.alpha_min > 0)) throw ConfigError("the coefficient a must be positive");
    if (lo < c.alpha_min * (1 - 1e-12) || hi > c.alpha_max * (1 + 1e-12))
        throw ConfigError("coefficient samples fall outside [alpha_min, alpha_max]");
}

ScheduleEntry parse_schedule(const std::string& key, const std::string& text, int dim) {
    std::istringstream in(text);
    ScheduleEntry e;
    std::string first;
    in >> first;
    if (first == "step") {
        int n = 0;
        if (!(in >> n) || n < 1) throw ConfigError("schedule " + key + ": bad step");
        e.step = n;
    } else {
        try {
            e.time = std::stod(first);
        } catch (const std::exception&) {
            throw ConfigError("schedule " + key + ": expected a time or 'step <n>'");
        }
    }
    std::string action;
    in >> action;
    if (action == "refine")
        e.action.kind = MeshAction::Kind::Refine;
    else if (action == "coarsen")
        e.action.kind = MeshAction::Kind::Coarsen;
    else
        throw ConfigError("schedule " + key + ": action must be refine or coarsen");
    double x0 = 0, x1 = 0, y0 = 0, y1 = 0;
    if (!(in >> x0 >> x1)) throw ConfigError("schedule " + key + ": missing x range");
    if (dim == 2 && !(in >> y0 >> y1)) throw ConfigError("schedule " + key + ": missing y range");
    e.action.lo = Point(x0, y0);
    e.action.hi = Point(x1, y1);
    return e;
}

RunConfig from_tree(const pt::ptree& tree) {
    for (const auto& [section, body] : tree) {
        const auto it = known_keys().find(section);
        if (it == known_keys().end()) throw ConfigError("unknown section [" + section + "]");
        if (section == "schedule") continue;
        for (const auto& [key, value] : body)
            if (!it->second.count(key)) throw ConfigError("unknown key " + section + "." + key);
    }

    RunConfig cfg;
    cfg.case_name = get_string(tree, "problem.case", "sine1d");
    if (cfg.case_name == "custom") {
        ManufacturedCase c;
        c.name = "custom";
        c.domain = parse_domain(get_string(tree, "problem.domain", "interval 1"));
        c.final_time = get(tree, "problem.T", 1.0);
        set_coefficient(c, expression(tree, "problem.a", "1"), tree);
        c.f = CaseFunction::from_expression(expression(tree, "problem.f", "0"));
        const bool has_exact = static_cast<bool>(tree.get_optional<std::string>("problem.exact"));
        if (has_exact) {
            c.u = CaseFunction::from_expression(expression(tree, "problem.exact", "0"));
            c.description = "custom, u = " + get_string(tree, "problem.exact", "0");
            try {
                c = checked(std::move(c));
            } catch (const std::logic_error& e) {
                throw ConfigError(e.what());
            }
        }
        cfg.problem = c.problem();
        if (!has_exact) {
            cfg.problem.exact_u = nullptr;
            cfg.problem.exact_ut = nullptr;
        }
        for (const char* key : {"u0", "u1"}) {
            const auto text = tree.get_optional<std::string>(std::string("problem.") + key);
            if (!text && has_exact) continue;
            const Expression e = Expression::parse(text.value_or("0"));
            if (e.depends_on('t')) throw ConfigError(std::string("initial datum ") + key + " must not depend on t");
            SpatialFn fn = [e](const Point& x) { return e(x.x(), x.y(), 0.0); };
            (std::string(key) == "u0" ? cfg.problem.u0 : cfg.problem.u1) = std::move(fn);
        }
        if (has_exact) cfg.manufactured = std::move(c);
    } else {
        for (const char* key : {"domain", "a", "f", "u0", "u1", "exact", "alpha_min", "alpha_max"})
            if (tree.get_optional<std::string>(std::string("problem.") + key))
                throw ConfigError(std::string("problem.") + key + " is only allowed with case = custom");
        ManufacturedCase c;
        try {
            c = builtin_case(cfg.case_name);
        } catch (const std::invalid_argument& e) {
            throw ConfigError(e.what());
        }
        c.final_time = get(tree, "problem.T", c.final_time);
        cfg.problem = c.problem();
        cfg.manufactured = std::move(c);
    }
    if (!(cfg.problem.final_time > 0)) throw ConfigError("T must be positive");

    cfg.n = get(tree, "discretization.n", 16);
    cfg.steps = get(tree, "discretization.steps", 16);
    if (cfg.n < 1 || cfg.steps < 1) throw ConfigError("n and steps must be positive");
    cfg.stepper.degree = get(tree, "discretization.degree", 1);
    if (cfg.stepper.degree != 1 && cfg.stepper.degree != 2) throw ConfigError("degree must be 1 or 2");
    const std::string load = get_string(tree, "discretization.load", "pointwise");
    if (load == "pointwise")
        cfg.stepper.load = LoadMode::Pointwise;
    else if (load == "average")
        cfg.stepper.load = LoadMode::Average;
    else
        throw ConfigError("load must be pointwise or average");
    const std::string solver = get_string(tree, "discretization.solver", "cholesky");
    if (solver == "cholesky")
        cfg.stepper.solver.method = SolverOptions::Method::Cholesky;
    else if (solver == "cg")
        cfg.stepper.solver.method = SolverOptions::Method::ConjugateGradient;
    else
        throw ConfigError("solver must be cholesky or cg");
    cfg.stepper.time_quad_points = get(tree, "discretization.time_quad", 5);
    cfg.stepper.space_quad_degree = get(tree, "discretization.space_quad", -1);

    cfg.estimator.c_el = get(tree, "estimator.C_el", 1.0);
    const std::string c_omega = get_string(tree, "estimator.C_omega", "auto");
    if (c_omega != "auto") cfg.estimator.c_omega = get(tree, "estimator.C_omega", 0.0);
    cfg.estimator.alpha_min = get(tree, "estimator.alpha_min", 0.0);
    cfg.estimator.time_quad_points = get(tree, "estimator.time_quad", 5);
    cfg.estimator.space_quad_degree = get(tree, "estimator.space_quad", -1);
    if (!(cfg.estimator.c_el > 0) || (cfg.estimator.c_omega && !(*cfg.estimator.c_omega > 0)) ||
        cfg.estimator.time_quad_points < 1 || cfg.stepper.time_quad_points < 1)
        throw ConfigError("estimator constants and quadrature sizes must be positive");

    if (const auto sched = tree.get_child_optional("schedule"))
        for (const auto& [key, value] : *sched)
            cfg.schedule.push_back(parse_schedule(key, value.data(), cfg.problem.domain.dim()));

    if (auto p = tree.get_optional<std::string>("output.csv")) cfg.csv_path = *p;
    if (auto p = tree.get_optional<std::string>("output.breakdown")) cfg.breakdown_path = *p;
    if (auto p = tree.get_optional<std::string>("output.element_map")) cfg.element_map_path = *p;
    return cfg;
}

}  // namespace

MeshSchedule RunConfig::schedule_for(const TimeGrid& grid) const {
    MeshSchedule out;
    for (const auto& e : schedule) {
        int step = 0;
        if (e.step) {
            step = *e.step;
        } else {
            if (*e.time <= 0.0 || *e.time > grid.final_time()) continue;
            step = grid.interval_of(*e.time);
        }
        if (step >= 1 && step <= grid.steps()) out.add(step, e.action);
    }
    return out;
}

RunConfig parse_config_string(const std::string& text) {
    // Drop trailing `; ...` and `# ...` comments, which the INI reader only
    // accepts on lines of their own.
    std::istringstream raw(text);
    std::ostringstream cleaned;
    for (std::string line; std::getline(raw, line);) {
        const auto cut = line.find_first_of(";#");
        cleaned << line.substr(0, cut) << '\n';
    }
    pt::ptree tree;
    std::istringstream in(cleaned.str());
    try {
        pt::read_ini(in, tree);
        return from_tree(tree);
    } catch (const pt::ptree_error& e) {
        throw ConfigError(e.what());
    } catch (const ExpressionError& e) {
        throw ConfigError(e.what());
    }
}

RunConfig parse_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path.string());
    std::ostringstream text;
    text << in.rdbuf();
    try {
        return parse_config_string(text.str());
    } catch (const ConfigError& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
}

}  // namespace waveapost::cli
