#include "tbem/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace tbem {

namespace {

const std::vector<std::string> kCurveVariables{"t"};

struct Entry {
    std::string value;
    bool quoted = false;
    int line = 0;
    bool used = false;
};

using Section = std::map<std::string, Entry>;

std::string trim(const std::string &s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos)
        return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::string at_line(int line) { return "line " + std::to_string(line) + ": "; }

class Reader {
public:
    std::map<std::string, Section> sections;
    std::vector<std::string> errors;

    void lex(const std::string &text)
    {
        std::istringstream in(text);
        std::string raw;
        std::string current;
        int line = 0;
        while (std::getline(in, raw)) {
            ++line;
            // drop comments outside quotes
            std::string s;
            bool quote = false;
            for (char c : raw) {
                if (c == '"')
                    quote = !quote;
                if (!quote && c == '#')
                    break;
                s += c;
            }
            s = trim(s);
            if (s.empty())
                continue;
            if (s.front() == '[') {
                if (s.back() != ']') {
                    errors.push_back(at_line(line) + "malformed section header");
                    continue;
                }
                current = trim(s.substr(1, s.size() - 2));
                if (sections.count(current))
                    errors.push_back(at_line(line) + "section [" + current + "] repeated");
                sections[current];
                continue;
            }
            const auto eq = s.find('=');
            if (eq == std::string::npos) {
                errors.push_back(at_line(line) + "expected 'key = value'");
                continue;
            }
            if (current.empty()) {
                errors.push_back(at_line(line) + "key outside of any section");
                continue;
            }
            const std::string key = trim(s.substr(0, eq));
            std::string value = trim(s.substr(eq + 1));
            Entry e;
            e.line = line;
            if (!value.empty() && value.front() == '"') {
                if (value.size() < 2 || value.back() != '"') {
                    errors.push_back(at_line(line) + "unterminated string for '" + key + "'");
                    continue;
                }
                value = value.substr(1, value.size() - 2);
                e.quoted = true;
            }
            e.value = value;
            if (sections[current].count(key))
                errors.push_back(at_line(line) + "duplicate key '" + key + "' in [" + current + "]");
            sections[current][key] = e;
        }
    }

    Entry *find(const std::string &section, const std::string &key)
    {
        auto s = sections.find(section);
        if (s == sections.end())
            return nullptr;
        auto k = s->second.find(key);
        if (k == s->second.end())
            return nullptr;
        k->second.used = true;
        return &k->second;
    }

    bool has_section(const std::string &section) const { return sections.count(section) > 0; }

    void real(const std::string &sec, const std::string &key, double &out)
    {
        if (Entry *e = find(sec, key)) {
            const char *b = e->value.data(), *end = b + e->value.size();
            double v = 0;
            const auto r = std::from_chars(b, end, v);
            if (r.ec != std::errc() || r.ptr != end || !std::isfinite(v))
                errors.push_back(at_line(e->line) + "'" + key + "' expects a number, got '" + e->value + "'");
            else
                out = v;
        }
    }

    template <class Int>
    void integer(const std::string &sec, const std::string &key, Int &out)
    {
        if (Entry *e = find(sec, key)) {
            const char *b = e->value.data(), *end = b + e->value.size();
            long long v = 0;
            const auto r = std::from_chars(b, end, v);
            if (r.ec != std::errc() || r.ptr != end || (std::is_unsigned_v<Int> && v < 0))
                errors.push_back(at_line(e->line) + "'" + key + "' expects an integer, got '" + e->value + "'");
            else
                out = static_cast<Int>(v);
        }
    }

    void boolean(const std::string &sec, const std::string &key, bool &out)
    {
        if (Entry *e = find(sec, key)) {
            if (e->value == "true" || e->value == "1")
                out = true;
            else if (e->value == "false" || e->value == "0")
                out = false;
            else
                errors.push_back(at_line(e->line) + "'" + key + "' expects true or false");
        }
    }

    void text(const std::string &sec, const std::string &key, std::string &out)
    {
        if (Entry *e = find(sec, key))
            out = e->value;
    }

    // numbers separated by commas or whitespace
    std::optional<std::vector<double>> numbers(const std::string &sec, const std::string &key)
    {
        Entry *e = find(sec, key);
        if (!e)
            return std::nullopt;
        std::vector<double> v;
        std::string tok;
        bool ok = true;
        auto flush = [&] {
            if (tok.empty())
                return;
            double d = 0;
            const auto r = std::from_chars(tok.data(), tok.data() + tok.size(), d);
            if (r.ec != std::errc() || r.ptr != tok.data() + tok.size())
                ok = false;
            v.push_back(d);
            tok.clear();
        };
        for (char c : e->value) {
            if (c == ',' || c == ' ' || c == '\t')
                flush();
            else
                tok += c;
        }
        flush();
        if (!ok) {
            errors.push_back(at_line(e->line) + "'" + key + "' expects a list of numbers");
            return std::vector<double>{};
        }
        return v;
    }

    // "x y; x y" point lists
    std::vector<Vec2> points(const std::string &sec, const std::string &key)
    {
        Entry *e = find(sec, key);
        if (!e)
            return {};
        std::vector<Vec2> pts;
        std::istringstream in(e->value);
        std::string item;
        while (std::getline(in, item, ';')) {
            if (trim(item).empty())
                continue;
            std::istringstream p(item);
            double x = 0, y = 0;
            std::string rest;
            if (!(p >> x >> y) || (p >> rest)) {
                errors.push_back(at_line(e->line) + "'" + key + "' expects points as 'x y; x y'");
                return {};
            }
            pts.push_back({x, y});
        }
        return pts;
    }

    void check_expression(const std::string &sec, const std::string &key, const std::vector<std::string> &vars)
    {
        Entry *e = find(sec, key);
        if (!e)
            return;
        try {
            Expression::parse(e->value, vars);
        } catch (const ParseError &err) {
            errors.push_back(at_line(e->line) + key + ": " + err.message() + " at offset "
                             + std::to_string(err.offset()));
        }
    }

    void unknown_keys()
    {
        for (auto &[name, sec] : sections)
            for (auto &[key, e] : sec)
                if (!e.used)
                    errors.push_back(at_line(e.line) + "unknown key '" + key + "' in [" + name + "]");
    }
};

void read_curve(Reader &r, const std::string &sec, CurveSpec &c)
{
    r.text(sec, "type", c.type);
    r.real(sec, "radius", c.radius);
    r.real(sec, "semi_x", c.semi_x);
    r.real(sec, "semi_y", c.semi_y);
    r.real(sec, "amplitude", c.amplitude);
    r.integer(sec, "frequency", c.frequency);
    if (auto v = r.numbers(sec, "center")) {
        if (v->size() == 2)
            c.center = {(*v)[0], (*v)[1]};
        else
            r.errors.push_back("[" + sec + "] center expects two numbers");
    }
    for (const char *k : {"x", "y", "dx", "dy"})
        r.check_expression(sec, k, kCurveVariables);
    r.text(sec, "x", c.x);
    r.text(sec, "y", c.y);
    r.text(sec, "dx", c.dx);
    r.text(sec, "dy", c.dy);

    if (c.type == "custom") {
        if (c.x.empty() || c.y.empty() || c.dx.empty() || c.dy.empty())
            r.errors.push_back("[" + sec + "] custom curve needs x, y, dx and dy");
    } else if (c.type != "circle" && c.type != "ellipse" && c.type != "star") {
        r.errors.push_back("[" + sec + "] unknown curve type '" + c.type + "'");
    }
    if (c.type == "circle" && !(c.radius > 0))
        r.errors.push_back("[" + sec + "] radius must be positive");
    if (c.type == "ellipse" && !(c.semi_x > 0 && c.semi_y > 0))
        r.errors.push_back("[" + sec + "] semi-axes must be positive");
    if (c.type == "star" && !(c.radius > 0 && std::abs(c.amplitude) < 1))
        r.errors.push_back("[" + sec + "] star needs radius > 0 and |amplitude| < 1");
}

}  // namespace

ConfigError::ConfigError(std::vector<std::string> errors)
    : std::runtime_error([&] {
          std::string msg = "invalid configuration:";
          for (const auto &e : errors)
              msg += "\n  " + e;
          return msg;
      }()),
      errors_(std::move(errors))
{
}

ParametricCurve CurveSpec::build() const
{
    if (type == "circle")
        return ParametricCurve::circle(radius, center);
    if (type == "ellipse")
        return ParametricCurve::ellipse(semi_x, semi_y, center);
    if (type == "star")
        return ParametricCurve::star(radius, amplitude, frequency, center);
    if (type == "custom") {
        const Expression ex = Expression::parse(x, kCurveVariables), ey = Expression::parse(y, kCurveVariables);
        const Expression edx = Expression::parse(dx, kCurveVariables), edy = Expression::parse(dy, kCurveVariables);
        return ParametricCurve([ex, ey](double t) { return Vec2{ex({t}), ey({t})}; },
                               [edx, edy](double t) { return Vec2{edx({t}), edy({t})}; }, "custom");
    }
    throw std::invalid_argument("unknown curve type '" + type + "'");
}

ShapeFamily ShapeSpec::build(const ParametricCurve &base) const
{
    if (family == "trefoil")
        return ShapeFamily::trefoil(base);
    if (family == "dilation")
        return ShapeFamily::dilation(base);
    if (family == "custom")
        return ShapeFamily::parse(base, dx, dy, dx_dt, dy_dt);
    throw std::invalid_argument("no shape family configured");
}

ProblemConfig parse_config(const std::string &text, const std::string &label)
{
    Reader r;
    r.lex(text);
    ProblemConfig cfg;
    cfg.source = label;

    for (const auto &[name, sec] : r.sections) {
        static const std::vector<std::string> known{"outer", "inner",  "discretization", "transmission",
                                                    "solver", "shape", "output"};
        if (std::find(known.begin(), known.end(), name) == known.end())
            r.errors.push_back(at_line(sec.empty() ? 0 : sec.begin()->second.line) + "unknown section ["
                               + name + "]");
    }

    read_curve(r, "outer", cfg.outer);
    read_curve(r, "inner", cfg.inner);

    r.integer("discretization", "N", cfg.N);
    r.integer("discretization", "max_N", cfg.max_N);
    if (cfg.N % 2 != 0)
        r.errors.push_back("N must be even (got " + std::to_string(cfg.N) + ")");
    if (cfg.N < 8 || cfg.N > 4096)
        r.errors.push_back("N must lie in [8, 4096] (got " + std::to_string(cfg.N) + ")");
    if (cfg.max_N < 16)
        r.errors.push_back("max_N must be at least 16");

    // transmission block
    cfg.f_o = "0";
    const std::vector<std::pair<const char *, std::string *>> fields{
        {"F1", &cfg.F1},           {"F2", &cfg.F2},           {"dF1_dz1", &cfg.dF1_dz1},
        {"dF1_dz2", &cfg.dF1_dz2}, {"dF2_dz1", &cfg.dF2_dz1}, {"dF2_dz2", &cfg.dF2_dz2},
        {"f_o", &cfg.f_o}};
    for (const auto &[key, dst] : fields) {
        const bool datum = std::string(key) == "f_o";
        r.check_expression("transmission", key, datum ? kDatumVariables : kTransmissionVariables);
        r.text("transmission", key, *dst);
        if (!datum && dst->empty())
            r.errors.push_back("[transmission] missing '" + std::string(key) + "'");
    }

    // solver block
    std::string method = "hybrid";
    r.text("solver", "method", method);
    if (method == "picard")
        cfg.solver.method = SolveMethod::Picard;
    else if (method == "newton")
        cfg.solver.method = SolveMethod::Newton;
    else if (method == "hybrid")
        cfg.solver.method = SolveMethod::Hybrid;
    else
        r.errors.push_back("[solver] unknown method '" + method + "'");
    r.real("solver", "tol", cfg.solver.tol);
    r.integer("solver", "max_iter", cfg.solver.max_iter);
    r.real("solver", "damping", cfg.solver.damping);
    r.real("solver", "switch_tol", cfg.solver.switch_tol);
    if (auto a = r.numbers("solver", "picard_A")) {
        if (a->size() == 4)
            cfg.picard_A = std::array<double, 4>{(*a)[0], (*a)[1], (*a)[2], (*a)[3]};
        else
            r.errors.push_back("[solver] picard_A expects four numbers a11 a12 a21 a22");
    }
    if (!(cfg.solver.tol > 0))
        r.errors.push_back("[solver] tol must be positive");
    if (cfg.solver.max_iter < 1)
        r.errors.push_back("[solver] max_iter must be at least 1");
    if (!(cfg.solver.damping > 0 && cfg.solver.damping <= 1))
        r.errors.push_back("[solver] damping must lie in (0, 1]");

    // shape block
    r.text("shape", "family", cfg.shape.family);
    for (const auto &[key, dst] : std::vector<std::pair<const char *, std::string *>>{
             {"dx", &cfg.shape.dx}, {"dy", &cfg.shape.dy}, {"dx_dt", &cfg.shape.dx_dt}, {"dy_dt", &cfg.shape.dy_dt}}) {
        r.check_expression("shape", key, kShapeVariables);
        r.text("shape", key, *dst);
    }
    r.real("shape", "s_max", cfg.shape.s_max);
    r.integer("shape", "steps", cfg.shape.steps);
    r.integer("shape", "predictor_order", cfg.shape.predictor_order);
    r.integer("shape", "max_order", cfg.shape.max_order);
    r.real("shape", "tol", cfg.shape.tol);
    cfg.probes.interior = r.points("shape", "probes_interior");
    cfg.probes.exterior = r.points("shape", "probes_exterior");
    if (!cfg.shape.family.empty() && cfg.shape.family != "trefoil" && cfg.shape.family != "dilation"
        && cfg.shape.family != "custom")
        r.errors.push_back("[shape] unknown family '" + cfg.shape.family + "'");
    if (cfg.shape.family == "custom"
        && (cfg.shape.dx.empty() || cfg.shape.dy.empty() || cfg.shape.dx_dt.empty() || cfg.shape.dy_dt.empty()))
        r.errors.push_back("[shape] custom family needs dx, dy, dx_dt and dy_dt");
    if (cfg.shape.max_order < 1 || cfg.shape.max_order > 4)
        r.errors.push_back("[shape] max_order must lie in 1..4");

    // output block
    for (const auto &[key, dst] : std::vector<std::pair<const char *, std::string *>>{
             {"densities", &cfg.output.densities},
             {"trace", &cfg.output.trace},
             {"field", &cfg.output.field},
             {"probes", &cfg.output.probes},
             {"branch", &cfg.output.branch},
             {"derivatives", &cfg.output.derivatives},
             {"smoothness", &cfg.output.smoothness},
             {"convergence", &cfg.output.convergence},
             {"report", &cfg.output.report}})
        r.text("output", key, *dst);
    r.integer("output", "grid", cfg.output.grid);
    r.boolean("output", "branch_densities", cfg.output.branch_densities);
    if (cfg.output.grid < 2 || cfg.output.grid > 2001)
        r.errors.push_back("[output] grid must lie in [2, 2001]");

    r.unknown_keys();

    if (r.errors.empty()) {
        try {
            cfg.data = TransmissionData::parse(cfg.F1, cfg.F2, cfg.dF1_dz1, cfg.dF1_dz2, cfg.dF2_dz1, cfg.dF2_dz2,
                                               cfg.f_o);
            const DerivativeCheck dc = validate_derivatives(cfg.data, 0);
            if (!dc.ok)
                r.errors.push_back("[transmission] " + dc.worst + " disagrees with a finite difference of its "
                                   "parent (relative error " + std::to_string(dc.worst_error) + ")");
        } catch (const ParseError &e) {
            r.errors.push_back(e.what());
        }
        try {
            const DiscreteBoundary outer = discretize(orient_counterclockwise(cfg.outer.build()), cfg.N);
            const DiscreteBoundary inner = discretize(orient_counterclockwise(cfg.inner.build()), cfg.N);
            for (const Vec2 &p : inner.nodes)
                if (!inside_polygon(outer, p)) {
                    r.errors.push_back("inner curve is not inside the outer curve");
                    break;
                }
            if (!probes_contained(cfg.probes, outer, inner))
                r.errors.push_back("[shape] probe points are not contained in their regions at s = 0");
            if (!cfg.shape.family.empty())
                cfg.shape.build(inner.curve ? *inner.curve : cfg.inner.build());
        } catch (const std::exception &e) {
            r.errors.push_back(std::string("geometry: ") + e.what());
        }
    }

    if (!r.errors.empty())
        throw ConfigError(r.errors);
    return cfg;
}

ProblemConfig load_config(const std::string &path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw ConfigError({"cannot open '" + path + "'"});
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str(), path);
}

}  // namespace tbem
