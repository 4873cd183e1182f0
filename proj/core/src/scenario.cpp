#include "manidyn/scenario.hpp"

#include <fstream>
#include <map>
#include <sstream>

#include <nlohmann/json.hpp>

#include "manidyn/errors.hpp"

namespace manidyn {

namespace {

std::vector<std::string> split_list(const std::string& v) {
    std::vector<std::string> out;
    std::string cur;
    int depth = 0;
    for (char c : v) {
        if (c == '(') ++depth;
        if (c == ')') --depth;
        if (c == ',' && depth == 0) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (!cur.empty()) out.push_back(cur);
    for (auto& s : out) {
        const auto b = s.find_first_not_of(" \t");
        const auto e = s.find_last_not_of(" \t");
        s = (b == std::string::npos) ? "" : s.substr(b, e - b + 1);
    }
    return out;
}

bool parse_bool(const std::string& v, int line) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw ParseError("expected boolean, got \"" + v + "\"", line);
}

}  // namespace

Scenario parse_scenario_text(const std::string& contents) {
    Scenario s;
    std::istringstream in(contents);
    std::string raw;
    std::string section;
    int line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        std::string line = raw;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const auto b = line.find_first_not_of(" \t\r");
        if (b == std::string::npos) continue;
        const auto e = line.find_last_not_of(" \t\r");
        line = line.substr(b, e - b + 1);
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ParseError("unterminated section header", line_no,
                                 static_cast<int>(line.size()));
            section = line.substr(1, line.size() - 2);
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ParseError("expected key = value", line_no, 1);
        std::string key = line.substr(0, eq);
        std::string val = line.substr(eq + 1);
        auto trim = [](std::string& t) {
            const auto bb = t.find_first_not_of(" \t");
            const auto ee = t.find_last_not_of(" \t");
            t = (bb == std::string::npos) ? "" : t.substr(bb, ee - bb + 1);
        };
        trim(key);
        trim(val);
        const std::string fq = section + "." + key;
        try {
            if (fq == "manifold.name") s.manifold = val;
            else if (fq == "body.dim") s.body_dim = std::stoi(val);
            else if (fq == "body.n") s.n = std::stoi(val);
            else if (fq == "body.rho") s.rho = val;
            else if (fq == "constitutive.lagrangian") s.lagrangian = val;
            else if (fq == "constitutive.lambda") s.lambda = std::stod(val);
            else if (fq == "constitutive.mu") s.mu = std::stod(val);
            else if (fq == "constitutive.reference") s.reference = split_list(val);
            else if (fq == "loading.body") s.body_load = split_list(val);
            else if (fq == "loading.surface") s.surface_load = split_list(val);
            else if (fq == "initial.phi") s.phi0 = split_list(val);
            else if (fq == "initial.v") s.v0 = split_list(val);
            else if (fq == "time.dt") s.dt = std::stod(val);
            else if (fq == "time.steps") s.steps = std::stoi(val);
            else if (fq == "options.seed") s.seed = static_cast<std::uint32_t>(std::stoul(val));
            else if (fq == "options.eps_sweep") s.eps_sweep = std::stoi(val);
            else if (fq == "options.newton_iterations") s.newton_iterations = std::stoi(val);
            else if (fq == "options.clamp") s.clamp = parse_bool(val, line_no);
            else if (fq == "options.strict") s.strict = parse_bool(val, line_no);
            else if (fq == "options.out") s.out_dir = val;
            else
                throw ParseError("unknown key \"" + fq + "\"", line_no, 1);
        } catch (const ParseError&) {
            throw;
        } catch (const std::exception&) {
            throw ParseError("bad value for \"" + fq + "\": \"" + val + "\"", line_no, 1);
        }
    }
    auto errs = validate_scenario(s);
    if (!errs.empty()) throw ValidationError(errs);
    return s;
}

Scenario parse_scenario_json(const std::string& contents) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(contents);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(std::string("JSON parse error: ") + e.what());
    }
    Scenario s;
    auto get_list = [](const nlohmann::json& node) {
        std::vector<std::string> out;
        for (const auto& v : node)
            out.push_back(v.is_string() ? v.get<std::string>() : v.dump());
        return out;
    };
    try {
        if (j.contains("manifold")) s.manifold = j["manifold"].value("name", s.manifold);
        if (j.contains("body")) {
            s.body_dim = j["body"].value("dim", s.body_dim);
            s.n = j["body"].value("n", s.n);
            if (j["body"].contains("rho"))
                s.rho = j["body"]["rho"].is_string() ? j["body"]["rho"].get<std::string>()
                                                     : j["body"]["rho"].dump();
        }
        if (j.contains("constitutive")) {
            const auto& c = j["constitutive"];
            s.lagrangian = c.value("lagrangian", s.lagrangian);
            s.lambda = c.value("lambda", s.lambda);
            s.mu = c.value("mu", s.mu);
            if (c.contains("reference")) s.reference = get_list(c["reference"]);
        }
        if (j.contains("loading")) {
            if (j["loading"].contains("body")) s.body_load = get_list(j["loading"]["body"]);
            if (j["loading"].contains("surface"))
                s.surface_load = get_list(j["loading"]["surface"]);
        }
        if (j.contains("initial")) {
            if (j["initial"].contains("phi")) s.phi0 = get_list(j["initial"]["phi"]);
            if (j["initial"].contains("v")) s.v0 = get_list(j["initial"]["v"]);
        }
        if (j.contains("time")) {
            s.dt = j["time"].value("dt", s.dt);
            s.steps = j["time"].value("steps", s.steps);
        }
        if (j.contains("options")) {
            const auto& o = j["options"];
            s.seed = o.value("seed", s.seed);
            s.eps_sweep = o.value("eps_sweep", s.eps_sweep);
            s.newton_iterations = o.value("newton_iterations", s.newton_iterations);
            s.clamp = o.value("clamp", s.clamp);
            s.strict = o.value("strict", s.strict);
            s.out_dir = o.value("out", s.out_dir);
        }
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("JSON structure error: ") + e.what());
    }
    auto errs = validate_scenario(s);
    if (!errs.empty()) throw ValidationError(errs);
    return s;
}

Scenario parse_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open scenario file: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    const bool json = path.size() > 5 && path.substr(path.size() - 5) == ".json";
    return json ? parse_scenario_json(buf.str()) : parse_scenario_text(buf.str());
}

std::vector<std::string> validate_scenario(const Scenario& s) {
    std::vector<std::string> errs;
    int space_dim = -1;
    try {
        space_dim = make_chart(s.manifold)->dim;
    } catch (const std::exception& e) {
        errs.push_back(std::string("manifold: ") + e.what());
    }
    if (s.body_dim != 1 && s.body_dim != 2)
        errs.push_back("body.dim: unsupported body dimension (d must be 1 or 2), got " +
                       std::to_string(s.body_dim));
    if (space_dim > 0 && (s.body_dim == 1 || s.body_dim == 2) && s.body_dim > space_dim)
        errs.push_back("body.dim: body dimension exceeds space dimension (d <= m required)");
    if (s.n < 5) errs.push_back("body.n: need at least 5 grid points per axis");
    if (s.lagrangian != "zero" && s.lagrangian != "dirichlet" && s.lagrangian != "svk")
        errs.push_back("constitutive.lagrangian: unknown catalog name \"" + s.lagrangian +
                       "\" (zero | dirichlet | svk)");
    if (!s.reference.empty() &&
        static_cast<int>(s.reference.size()) != s.body_dim * s.body_dim)
        errs.push_back("constitutive.reference: expected " +
                       std::to_string(s.body_dim * s.body_dim) + " entries");
    auto check_exprs = [&](const std::vector<std::string>& v, const std::string& what,
                           int expect) {
        if (v.empty()) return;
        if (expect > 0 && static_cast<int>(v.size()) != expect)
            errs.push_back(what + ": expected " + std::to_string(expect) + " entries, got " +
                           std::to_string(v.size()));
        for (const auto& e : v) {
            try {
                Expression::parse(e);
            } catch (const std::exception& ex) {
                errs.push_back(what + ": " + ex.what());
            }
        }
    };
    check_exprs({s.rho}, "body.rho", 1);
    check_exprs(s.reference, "constitutive.reference", -1);
    check_exprs(s.body_load, "loading.body", space_dim);
    check_exprs(s.surface_load, "loading.surface", space_dim);
    if (s.phi0.empty())
        errs.push_back("initial.phi: required (one expression per space coordinate)");
    check_exprs(s.phi0, "initial.phi", space_dim);
    check_exprs(s.v0, "initial.v", space_dim);
    if (s.dt <= 0.0) errs.push_back("time.dt: must be positive");
    if (s.steps < 0) errs.push_back("time.steps: must be non-negative");
    if (s.eps_sweep < 3) errs.push_back("options.eps_sweep: need at least 3 levels");
    return errs;
}

CompiledScenario compile_scenario(const Scenario& s) {
    auto errs = validate_scenario(s);
    if (!errs.empty()) throw ValidationError(errs);

    CompiledScenario c;
    c.chart = make_chart(s.manifold);
    const int m = c.chart->dim;
    const int d = s.body_dim;

    Expression rho_e = Expression::parse(s.rho);
    BodyGrid probe(d, s.n, 1.0);
    Vec rho(probe.points());
    for (int p = 0; p < probe.points(); ++p) rho[p] = rho_e.eval(probe.coord(p));
    c.grid = std::make_shared<BodyGrid>(d, s.n, rho);

    if (s.lagrangian == "zero") {
        c.lagrangian = make_zero_lagrangian(d, m);
    } else if (s.lagrangian == "dirichlet") {
        c.lagrangian = make_dirichlet_lagrangian(d, c.chart);
    } else {
        auto ref = std::make_shared<ReferenceMetric>();
        if (s.reference.empty()) {
            *ref = ReferenceMetric::identity(*c.grid);
        } else {
            std::vector<Expression> entries;
            for (const auto& e : s.reference) entries.push_back(Expression::parse(e));
            *ref = ReferenceMetric::from_function(*c.grid, [&](const Vec& x) {
                Mat g(d, d);
                for (int a = 0; a < d; ++a)
                    for (int b = 0; b < d; ++b) g(a, b) = entries[a * d + b].eval(x);
                return g;
            });
        }
        c.lagrangian = make_svk_lagrangian(d, c.chart, ref, s.lambda, s.mu);
    }
    c.density = from_lagrangian(c.lagrangian);

    if (!s.body_load.empty()) {
        std::vector<Expression> be;
        for (const auto& e : s.body_load) be.push_back(Expression::parse(e));
        c.loading.body = [be, m](const Vec& x, const Vec& y) {
            Vec out(m);
            for (int i = 0; i < m; ++i) out[i] = be[static_cast<std::size_t>(i)].eval(x, y);
            return out;
        };
    }
    if (!s.surface_load.empty()) {
        std::vector<Expression> se;
        for (const auto& e : s.surface_load) se.push_back(Expression::parse(e));
        c.loading.surface = [se, m](const Vec& x, const Vec& y) {
            Vec out(m);
            for (int i = 0; i < m; ++i) out[i] = se[static_cast<std::size_t>(i)].eval(x, y);
            return out;
        };
    }

    std::vector<Expression> phie, ve;
    for (const auto& e : s.phi0) phie.push_back(Expression::parse(e));
    for (const auto& e : s.v0) ve.push_back(Expression::parse(e));
    c.phi0.resize(c.grid->points(), m);
    c.v0 = Mat::Zero(c.grid->points(), m);
    for (int p = 0; p < c.grid->points(); ++p) {
        Vec x = c.grid->coord(p);
        for (int i = 0; i < m; ++i) {
            c.phi0(p, i) = phie[static_cast<std::size_t>(i)].eval(x);
            if (!ve.empty()) c.v0(p, i) = ve[static_cast<std::size_t>(i)].eval(x);
        }
    }
    return c;
}

}  // namespace manidyn
