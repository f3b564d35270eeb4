#include "vacent/experiment.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace vacent {

using json = nlohmann::ordered_json;

std::string_view to_string(ExperimentKind kind) noexcept
{
    switch (kind) {
    case ExperimentKind::entanglement:
        return "entanglement";
    case ExperimentKind::oracle:
        return "oracle";
    case ExperimentKind::readout:
        return "readout";
    }
    return "unknown";
}

OutputPaths ExperimentConfig::resolved_outputs() const
{
    OutputPaths out = outputs;
    if (out.csv.empty())
        out.csv = name + ".csv";
    if (out.svg.empty())
        out.svg = name + ".svg";
    if (out.summary.empty())
        out.summary = name + "_summary.json";
    return out;
}

// ---------------------------------------------------------------------------
// Config parsing

namespace {

const std::vector<std::string> sweepable = {"omega", "omega0", "g", "N", "N1", "N2",
                                            "phi", "nbar_ensembles", "nbar_cavity"};

class ObjectReader
{
public:
    ObjectReader(const json& node, std::string path) : node_(node), path_(std::move(path))
    {
        if (!node_.is_object())
            throw ConfigError(fmt::format("{}: expected an object", where()));
    }

    bool has(const std::string& key) const { return node_.contains(key); }

    const json* child(const std::string& key)
    {
        used_.insert(key);
        auto it = node_.find(key);
        return it == node_.end() ? nullptr : &*it;
    }

    double number(const std::string& key, double fallback)
    {
        const json* v = child(key);
        if (!v)
            return fallback;
        if (!v->is_number())
            throw ConfigError(fmt::format("{}: expected a number", field(key)));
        return v->get<double>();
    }

    std::int64_t integer(const std::string& key, std::int64_t fallback)
    {
        const json* v = child(key);
        if (!v)
            return fallback;
        if (!v->is_number())
            throw ConfigError(fmt::format("{}: expected an integer", field(key)));
        const double d = v->get<double>();
        if (d != std::floor(d) || std::abs(d) > 9.0e15)
            throw ConfigError(fmt::format("{}: expected an integer, got {}", field(key), d));
        return static_cast<std::int64_t>(d);
    }

    std::string string(const std::string& key, const std::string& fallback)
    {
        const json* v = child(key);
        if (!v)
            return fallback;
        if (!v->is_string())
            throw ConfigError(fmt::format("{}: expected a string", field(key)));
        return v->get<std::string>();
    }

    std::optional<bool> boolean(const std::string& key)
    {
        const json* v = child(key);
        if (!v)
            return std::nullopt;
        if (!v->is_boolean())
            throw ConfigError(fmt::format("{}: expected true or false", field(key)));
        return v->get<bool>();
    }

    std::vector<double> numbers(const std::string& key)
    {
        const json* v = child(key);
        if (!v)
            throw ConfigError(fmt::format("{}: required", field(key)));
        if (!v->is_array())
            throw ConfigError(fmt::format("{}: expected an array of numbers", field(key)));
        std::vector<double> out;
        for (const auto& e : *v) {
            if (!e.is_number())
                throw ConfigError(fmt::format("{}: expected an array of numbers", field(key)));
            out.push_back(e.get<double>());
        }
        return out;
    }

    ObjectReader object(const std::string& key)
    {
        const json* v = child(key);
        static const json empty = json::object();
        return ObjectReader(v ? *v : empty, field(key));
    }

    std::string field(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

    void finish() const
    {
        for (auto it = node_.begin(); it != node_.end(); ++it)
            if (!used_.count(it.key()))
                throw ConfigError(fmt::format("{}: unknown key", field(it.key())));
    }

private:
    std::string where() const { return path_.empty() ? "config" : path_; }

    const json& node_;
    std::string path_;
    std::set<std::string> used_;
};

std::int64_t as_count(const std::string& what, double value)
{
    if (value != std::floor(value) || value < 1.0 || value > 9.0e15)
        throw InvalidParameter(fmt::format("{} must be a positive integer (got {})", what, value));
    return static_cast<std::int64_t>(value);
}

void set_parameter(PhysicalParams& p, bool resonant, const std::string& name, double value)
{
    if (name == "omega") {
        p.omega = value;
        if (resonant)
            p.omega0 = value;
    } else if (name == "omega0") {
        if (resonant)
            throw InvalidParameter("cannot sweep omega0 while params.resonant is true");
        p.omega0 = value;
    } else if (name == "g") {
        p.g = value;
    } else if (name == "N") {
        p.N1 = p.N2 = as_count("N", value);
    } else if (name == "N1") {
        p.N1 = as_count("N1", value);
    } else if (name == "N2") {
        p.N2 = as_count("N2", value);
    } else if (name == "phi") {
        p.phi = value;
    } else if (name == "nbar_ensembles") {
        p.nbar_ensembles = value;
    } else if (name == "nbar_cavity") {
        p.nbar_cavity = value;
    } else {
        throw InvalidParameter(fmt::format("unknown sweep parameter '{}'", name));
    }
}

std::string parse_error_position(std::string_view text, std::size_t byte)
{
    std::size_t line = 1, column = 1;
    for (std::size_t i = 0; i < std::min(byte, text.size()); ++i) {
        if (text[i] == '\n') {
            ++line;
            column = 1;
        } else {
            ++column;
        }
    }
    return fmt::format("line {}, column {}", line, column);
}

} // namespace

ExperimentConfig parse_config(std::string_view text)
{
    json root;
    try {
        root = json::parse(text.begin(), text.end());
    } catch (const json::parse_error& e) {
        // Keep nlohmann's description but report the position ourselves.
        std::string detail = e.what();
        const auto column = detail.find("column");
        const auto colon = column == std::string::npos ? column : detail.find(": ", column);
        if (colon != std::string::npos)
            detail = detail.substr(colon + 2);
        throw ConfigError(fmt::format("config parse error at {}: {}", parse_error_position(text, e.byte ? e.byte - 1 : 0),
                                      detail));
    }

    ExperimentConfig cfg;
    ObjectReader top(root, "");
    cfg.name = top.string("name", cfg.name);
    if (cfg.name.empty() || cfg.name.find_first_of("/\\") != std::string::npos)
        throw ConfigError("name: must be a non-empty file-name stem");

    const std::string kind = top.string("kind", "entanglement");
    if (kind == "entanglement")
        cfg.kind = ExperimentKind::entanglement;
    else if (kind == "oracle")
        cfg.kind = ExperimentKind::oracle;
    else if (kind == "readout")
        cfg.kind = ExperimentKind::readout;
    else
        throw ConfigError(fmt::format("kind: unknown experiment kind '{}'", kind));

    {
        ObjectReader p = top.object("params");
        auto& pp = cfg.params;
        pp.omega = p.number("omega", pp.omega);
        const bool has_omega0 = p.has("omega0");
        const auto resonant = p.boolean("resonant");
        if (resonant.value_or(false) && has_omega0)
            throw ConfigError(fmt::format("{}: omega0 conflicts with resonant = true", p.field("omega0")));
        cfg.resonant = resonant.value_or(!has_omega0);
        if (!cfg.resonant && !has_omega0)
            throw ConfigError(fmt::format("{}: required when resonant = false", p.field("omega0")));
        pp.omega0 = cfg.resonant ? pp.omega : p.number("omega0", pp.omega0);
        pp.g = p.number("g", pp.g);
        if (p.has("N") && (p.has("N1") || p.has("N2")))
            throw ConfigError(fmt::format("{}: give either N or N1/N2", p.field("N")));
        const std::int64_t n = p.integer("N", pp.N1);
        pp.N1 = p.integer("N1", n);
        pp.N2 = p.integer("N2", n);
        pp.phi = p.number("phi", pp.phi);
        pp.nbar_ensembles = p.number("nbar_ensembles", pp.nbar_ensembles);
        pp.nbar_cavity = p.number("nbar_cavity", pp.nbar_cavity);
        p.finish();
        try {
            pp.validate();
        } catch (const InvalidParameter& e) {
            throw ConfigError(fmt::format("params: {}", e.what()));
        }
    }

    {
        ObjectReader g = top.object("time_grid");
        cfg.grid.start = g.number("start", cfg.grid.start);
        cfg.grid.stop = g.number("stop", cfg.grid.stop);
        cfg.grid.points = static_cast<int>(g.integer("points", cfg.grid.points));
        g.finish();
        if (cfg.grid.points < 2 || cfg.grid.points > 10000000)
            throw ConfigError(fmt::format("{}: must be in [2, 1e7]", g.field("points")));
        if (!(cfg.grid.start >= 0.0) || !(cfg.grid.stop > cfg.grid.start))
            throw ConfigError("time_grid: need 0 <= start < stop");
    }

    if (top.has("sweep")) {
        ObjectReader s = top.object("sweep");
        SweepAxis axis;
        axis.parameter = s.string("parameter", "");
        if (std::find(sweepable.begin(), sweepable.end(), axis.parameter) == sweepable.end())
            throw ConfigError(fmt::format("{}: unknown parameter '{}'", s.field("parameter"), axis.parameter));
        axis.values = s.numbers("values");
        if (axis.values.empty())
            throw ConfigError(fmt::format("{}: must not be empty", s.field("values")));
        s.finish();
        cfg.sweep = std::move(axis);
    }

    try {
        cfg.propagator = parse_propagator_source(top.string("propagator", "normal-mode"));
    } catch (const InvalidParameter& e) {
        throw ConfigError(fmt::format("propagator: {}", e.what()));
    }

    {
        const json* seed = top.child("seed");
        if (seed) {
            if (!seed->is_number_unsigned())
                throw ConfigError("seed: expected a non-negative integer");
            cfg.seed = seed->get<std::uint64_t>();
        }
    }

    {
        ObjectReader o = top.object("outputs");
        cfg.outputs.csv = o.string("csv", "");
        cfg.outputs.svg = o.string("svg", "");
        cfg.outputs.summary = o.string("summary", "");
        o.finish();
    }

    {
        ObjectReader o = top.object("oracle");
        auto& oc = cfg.oracle;
        if (o.has("ladder")) {
            oc.ladder.ladder.clear();
            for (double v : o.numbers("ladder")) {
                if (v != std::floor(v) || v < 1.0 || v > 1000.0)
                    throw ConfigError(fmt::format("{}: entries must be integers in [1, 1000]", o.field("ladder")));
                oc.ladder.ladder.push_back(static_cast<int>(v));
            }
            if (oc.ladder.ladder.empty())
                throw ConfigError(fmt::format("{}: must not be empty", o.field("ladder")));
        }
        oc.ladder.coupling_fraction = o.number("coupling_fraction", oc.ladder.coupling_fraction);
        oc.ladder.time = o.number("time", oc.ladder.time);
        oc.ladder.cutoff.initial_cutoff = static_cast<int>(o.integer("initial_cutoff", oc.ladder.cutoff.initial_cutoff));
        oc.ladder.cutoff.max_cutoff = static_cast<int>(o.integer("max_cutoff", oc.ladder.cutoff.max_cutoff));
        oc.ladder.cutoff.tolerance = o.number("cutoff_tolerance", oc.ladder.cutoff.tolerance);
        oc.scan_N = static_cast<int>(o.integer("scan_N", oc.scan_N));
        oc.scan_omega_factor = o.number("scan_omega_factor", oc.scan_omega_factor);
        oc.scan_stop = o.number("scan_stop", oc.scan_stop);
        oc.scan_points = static_cast<int>(o.integer("scan_points", oc.scan_points));
        oc.scan_cutoff = static_cast<int>(o.integer("scan_cutoff", oc.scan_cutoff));
        o.finish();
        if (!(oc.ladder.coupling_fraction > 0.0 && oc.ladder.coupling_fraction < 1.0))
            throw ConfigError("oracle.coupling_fraction: must lie in (0, 1)");
        if (!(oc.ladder.time >= 0.0))
            throw ConfigError("oracle.time: must be >= 0");
        if (oc.ladder.cutoff.initial_cutoff < 1 || oc.ladder.cutoff.max_cutoff < oc.ladder.cutoff.initial_cutoff)
            throw ConfigError("oracle: need 1 <= initial_cutoff <= max_cutoff");
        if (!(oc.ladder.cutoff.tolerance > 0.0))
            throw ConfigError("oracle.cutoff_tolerance: must be positive");
        if (oc.scan_N < 1 || oc.scan_N > 8)
            throw ConfigError("oracle.scan_N: must lie in [1, 8]");
        if (!(oc.scan_omega_factor > 0.0) || !(oc.scan_stop > 0.0) || oc.scan_points < 2 || oc.scan_cutoff < 1)
            throw ConfigError("oracle: invalid negativity-scan settings");
    }

    {
        ObjectReader r = top.object("readout");
        auto& rc = cfg.readout;
        rc.channel.eta1 = r.number("eta1", rc.channel.eta1);
        rc.channel.eta2 = r.number("eta2", rc.channel.eta2);
        rc.samples_per_setting = static_cast<std::size_t>(
            r.integer("samples_per_setting", static_cast<std::int64_t>(rc.samples_per_setting)));
        rc.error_draws = static_cast<std::size_t>(r.integer("error_draws", static_cast<std::int64_t>(rc.error_draws)));
        r.finish();
        try {
            rc.channel.validate();
        } catch (const InvalidParameter& e) {
            throw ConfigError(fmt::format("readout: {}", e.what()));
        }
        if (rc.samples_per_setting < 2 || rc.error_draws < 2)
            throw ConfigError("readout: samples_per_setting and error_draws must be >= 2");
    }

    top.finish();

    try {
        (void)sweep_points(cfg);
    } catch (const InvalidParameter& e) {
        throw ConfigError(fmt::format("sweep: {}", e.what()));
    }
    return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError(fmt::format("cannot open config '{}'", path.string()));
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_config(buffer.str());
}

json to_json(const ExperimentConfig& c)
{
    json j;
    j["name"] = c.name;
    j["kind"] = std::string(to_string(c.kind));
    json p;
    p["omega"] = c.params.omega;
    if (c.resonant)
        p["resonant"] = true;
    else
        p["omega0"] = c.params.omega0;
    p["g"] = c.params.g;
    p["N1"] = c.params.N1;
    p["N2"] = c.params.N2;
    p["phi"] = c.params.phi;
    p["nbar_ensembles"] = c.params.nbar_ensembles;
    p["nbar_cavity"] = c.params.nbar_cavity;
    j["params"] = p;
    j["time_grid"] = {{"start", c.grid.start}, {"stop", c.grid.stop}, {"points", c.grid.points}};
    if (c.sweep)
        j["sweep"] = {{"parameter", c.sweep->parameter}, {"values", c.sweep->values}};
    j["propagator"] = std::string(to_string(c.propagator));
    j["seed"] = c.seed;
    json o = json::object();
    if (!c.outputs.csv.empty())
        o["csv"] = c.outputs.csv;
    if (!c.outputs.svg.empty())
        o["svg"] = c.outputs.svg;
    if (!c.outputs.summary.empty())
        o["summary"] = c.outputs.summary;
    j["outputs"] = o;
    const auto& oc = c.oracle;
    if (c.kind == ExperimentKind::oracle)
        j["oracle"] = {{"ladder", oc.ladder.ladder},
                   {"coupling_fraction", oc.ladder.coupling_fraction},
                   {"time", oc.ladder.time},
                   {"initial_cutoff", oc.ladder.cutoff.initial_cutoff},
                   {"max_cutoff", oc.ladder.cutoff.max_cutoff},
                   {"cutoff_tolerance", oc.ladder.cutoff.tolerance},
                   {"scan_N", oc.scan_N},
                   {"scan_omega_factor", oc.scan_omega_factor},
                   {"scan_stop", oc.scan_stop},
                   {"scan_points", oc.scan_points},
                   {"scan_cutoff", oc.scan_cutoff}};
    if (c.kind == ExperimentKind::readout)
        j["readout"] = {{"eta1", c.readout.channel.eta1},
                    {"eta2", c.readout.channel.eta2},
                    {"samples_per_setting", c.readout.samples_per_setting},
                    {"error_draws", c.readout.error_draws}};
    return j;
}

// ---------------------------------------------------------------------------
// Presets

std::vector<std::string> preset_names()
{
    return {"fig2", "fig3", "oracle-convergence", "readout-demo"};
}

ExperimentConfig preset_config(std::string_view name)
{
    ExperimentConfig c;
    c.params = PhysicalParams{};  // omega = omega0 = 300 g, N = 1e4, vacuum
    c.grid = TimeGridSpec{0.0, 0.1, 2001};
    if (name == "fig2") {
        c.name = "fig2";
        c.sweep = SweepAxis{"omega", {300.0, 500.0, 2000.0}};
    } else if (name == "fig3") {
        // Thermal noise on the ensembles only; the cavity starts in vacuum.
        c.name = "fig3";
        c.sweep = SweepAxis{"nbar_ensembles", {0.0, 0.05, 0.1, 0.2}};
    } else if (name == "oracle-convergence") {
        c.name = "oracle-convergence";
        c.kind = ExperimentKind::oracle;
    } else if (name == "readout-demo") {
        c.name = "readout-demo";
        c.kind = ExperimentKind::readout;
    } else {
        throw ConfigError(fmt::format("unknown preset '{}' (expected fig2, fig3, oracle-convergence or readout-demo)",
                                      name));
    }
    return c;
}

// ---------------------------------------------------------------------------
// Sweeps

std::vector<PhysicalParams> sweep_points(const ExperimentConfig& config)
{
    if (!config.sweep) {
        config.params.validate();
        return {config.params};
    }
    std::vector<PhysicalParams> out;
    for (double v : config.sweep->values) {
        PhysicalParams p = config.params;
        set_parameter(p, config.resonant, config.sweep->parameter, v);
        p.validate();
        out.push_back(p);
    }
    return out;
}

std::string curve_id(const ExperimentConfig& config, std::size_t index)
{
    if (!config.sweep)
        return config.name;
    return fmt::format("{}={:g}", config.sweep->parameter, config.sweep->values.at(index));
}

void check_stability(const ExperimentConfig& config)
{
    const auto points = sweep_points(config);
    for (std::size_t k = 0; k < points.size(); ++k) {
        try {
            (void)build_hamiltonian(points[k]);
        } catch (const UnstableRegime& e) {
            throw UnstableRegime(fmt::format("{}: {}", curve_id(config, k), e.what()), e.critical_coupling());
        }
    }
}

SweepResult run_entanglement(const ExperimentConfig& config)
{
    check_stability(config);
    const auto points = sweep_points(config);
    const auto grid = config.grid.values();

    SweepResult result;
    result.config = config;
    for (std::size_t k = 0; k < points.size(); ++k) {
        const QuadraticHamiltonian H = build_hamiltonian(points[k]);
        Curve curve;
        curve.id = curve_id(config, k);
        curve.params = points[k];
        curve.series = entanglement_trajectory(H, initial_state(points[k]), grid, config.propagator);
        const auto ln = curve.series.log_negativities();
        curve.peak = first_peak(grid, ln);
        curve.onset = onset_time(grid, ln);
        const auto best = std::max_element(ln.begin(), ln.end());
        curve.max_log_negativity = *best;
        curve.t_at_max = grid[static_cast<std::size_t>(best - ln.begin())];
        curve.max_symplectic_residual =
            *std::max_element(curve.series.symplectic_residuals.begin(), curve.series.symplectic_residuals.end());
        result.curves.push_back(std::move(curve));
    }
    return result;
}

namespace {

std::string molecules_field(const PhysicalParams& p)
{
    return p.N1 == p.N2 ? fmt::format("{}", p.N1) : fmt::format("{}:{}", p.N1, p.N2);
}

struct PlotSeries
{
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
};

void render_svg(std::ostream& out, const std::string& title, const std::string& xlabel, const std::string& ylabel,
                const std::vector<PlotSeries>& series)
{
    constexpr double width = 800, height = 500, left = 80, right = 180, top = 40, bottom = 60;
    constexpr std::array<const char*, 6> colors{"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};
    constexpr std::array<const char*, 4> dashes{"", "8,4", "8,3,2,3", "2,3"};

    double xmin = INFINITY, xmax = -INFINITY, ymin = 0.0, ymax = -INFINITY;
    for (const auto& s : series) {
        for (double v : s.x) {
            xmin = std::min(xmin, v);
            xmax = std::max(xmax, v);
        }
        for (double v : s.y) {
            ymin = std::min(ymin, v);
            ymax = std::max(ymax, v);
        }
    }
    if (!(xmax > xmin)) {
        xmin = 0.0;
        xmax = 1.0;
    }
    if (!(ymax > ymin))
        ymax = ymin + 1.0;
    ymax += 0.05 * (ymax - ymin);

    const double pw = width - left - right, ph = height - top - bottom;
    auto px = [&](double v) { return left + (v - xmin) / (xmax - xmin) * pw; };
    auto py = [&](double v) { return top + ph - (v - ymin) / (ymax - ymin) * ph; };

    out << fmt::format("<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{:.0f}\" height=\"{:.0f}\" "
                       "viewBox=\"0 0 {:.0f} {:.0f}\" font-family=\"sans-serif\" font-size=\"12\">\n",
                       width, height, width, height);
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << fmt::format("<text x=\"{:.1f}\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">{}</text>\n",
                       left + pw / 2, title);
    out << fmt::format("<rect x=\"{:.1f}\" y=\"{:.1f}\" width=\"{:.1f}\" height=\"{:.1f}\" fill=\"none\" stroke=\"black\"/>\n",
                       left, top, pw, ph);
    for (int k = 0; k <= 5; ++k) {
        const double xv = xmin + (xmax - xmin) * k / 5.0;
        const double yv = ymin + (ymax - ymin) * k / 5.0;
        out << fmt::format("<line x1=\"{0:.1f}\" y1=\"{1:.1f}\" x2=\"{0:.1f}\" y2=\"{2:.1f}\" stroke=\"black\"/>\n",
                           px(xv), top + ph, top + ph + 5);
        out << fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\" text-anchor=\"middle\">{:.3g}</text>\n", px(xv),
                           top + ph + 20, xv);
        out << fmt::format("<line x1=\"{0:.1f}\" y1=\"{1:.1f}\" x2=\"{2:.1f}\" y2=\"{1:.1f}\" stroke=\"black\"/>\n",
                           left - 5, py(yv), left);
        out << fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\" text-anchor=\"end\">{:.3g}</text>\n", left - 8,
                           py(yv) + 4, yv);
    }
    out << fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\" text-anchor=\"middle\">{}</text>\n", left + pw / 2,
                       height - 15, xlabel);
    out << fmt::format("<text x=\"20\" y=\"{:.1f}\" text-anchor=\"middle\" transform=\"rotate(-90 20 {:.1f})\">{}</text>\n",
                       top + ph / 2, top + ph / 2, ylabel);

    for (std::size_t k = 0; k < series.size(); ++k) {
        const auto& s = series[k];
        const char* color = colors[k % colors.size()];
        const char* dash = dashes[k % dashes.size()];
        out << fmt::format("<polyline fill=\"none\" stroke=\"{}\" stroke-width=\"1.5\"", color);
        if (*dash)
            out << fmt::format(" stroke-dasharray=\"{}\"", dash);
        out << " points=\"";
        for (std::size_t i = 0; i < s.x.size(); ++i)
            out << fmt::format("{}{:.2f},{:.2f}", i ? " " : "", px(s.x[i]), py(s.y[i]));
        out << "\"/>\n";
        const double ly = top + 20 + 20 * static_cast<double>(k);
        out << fmt::format("<line x1=\"{0:.1f}\" y1=\"{1:.1f}\" x2=\"{2:.1f}\" y2=\"{1:.1f}\" stroke=\"{3}\" "
                           "stroke-width=\"1.5\"{4}/>\n",
                           width - right + 15, ly, width - right + 45, color,
                           *dash ? fmt::format(" stroke-dasharray=\"{}\"", dash) : std::string());
        out << fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\">{}</text>\n", width - right + 52, ly + 4, s.label);
    }
    out << "</svg>\n";
}

json params_json(const PhysicalParams& p)
{
    return {{"omega", p.omega},   {"omega0", p.omega0}, {"g", p.g},
            {"N1", p.N1},         {"N2", p.N2},         {"phi", p.phi},
            {"nbar_ensembles", p.nbar_ensembles}, {"nbar_cavity", p.nbar_cavity}};
}

json optional_number(const std::optional<double>& v)
{
    return v ? json(*v) : json(nullptr);
}

// "increasing", "decreasing" or "none" for a sequence compared strictly.
std::string trend(const std::vector<std::optional<double>>& values)
{
    if (values.size() < 2)
        return "none";
    bool inc = true, dec = true;
    for (std::size_t k = 0; k < values.size(); ++k) {
        if (!values[k])
            return "none";
        if (k > 0) {
            inc = inc && *values[k] > *values[k - 1];
            dec = dec && *values[k] < *values[k - 1];
        }
    }
    return inc ? "increasing" : dec ? "decreasing" : "none";
}

} // namespace

void write_csv(std::ostream& out, const SweepResult& result)
{
    out << "curve_id,omega_over_g,N,nbar_ens,nbar_cav,phi,gt,logneg_bits,hp_ratio_max,symplectic_residual\n";
    for (const auto& curve : result.curves) {
        const auto& p = curve.params;
        const std::string prefix = fmt::format("{},{:.12g},{},{:.12g},{:.12g},{:.12g}", curve.id, p.omega,
                                               molecules_field(p), p.nbar_ensembles, p.nbar_cavity, p.phi);
        const auto& s = curve.series;
        for (std::size_t i = 0; i < s.times.size(); ++i) {
            const auto& r = s.hp.ratios[i];
            out << fmt::format("{},{:.12g},{:.17g},{:.17g},{:.6e}\n", prefix, s.times[i], s.values[i].log_negativity,
                               std::max(r[0], r[1]), s.symplectic_residuals[i]);
        }
    }
}

void write_svg(std::ostream& out, const SweepResult& result)
{
    std::vector<PlotSeries> series;
    for (const auto& c : result.curves)
        series.push_back({c.id, c.series.times, c.series.log_negativities()});
    render_svg(out, fmt::format("{}: logarithmic negativity", result.config.name), "g t", "log negativity (bits)",
               series);
}

json summary_json(const SweepResult& result)
{
    json j;
    j["name"] = result.config.name;
    j["kind"] = "entanglement";
    j["propagator"] = std::string(to_string(result.config.propagator));
    j["seed"] = result.config.seed;
    j["time_grid"] = {{"start", result.config.grid.start},
                      {"stop", result.config.grid.stop},
                      {"points", result.config.grid.points}};
    j["entanglement_floor_bits"] = entanglement_floor;
    json curves = json::array();
    std::vector<std::optional<double>> maxima, onsets;
    for (const auto& c : result.curves) {
        json e;
        e["curve_id"] = c.id;
        e["params"] = params_json(c.params);
        e["max_logneg_bits"] = c.max_log_negativity;
        e["t_at_max"] = c.t_at_max;
        e["onset_time"] = optional_number(c.onset);
        if (c.peak) {
            e["t_star"] = c.peak->t;
            e["logneg_at_t_star_bits"] = c.peak->value;
            e["t_star_in_reference_window"] = c.peak->t >= t_star_window_low && c.peak->t <= t_star_window_high;
        } else {
            e["t_star"] = nullptr;
            e["logneg_at_t_star_bits"] = nullptr;
            e["t_star_in_reference_window"] = false;
        }
        bool returns = false;
        if (c.peak) {
            for (std::size_t i = c.peak->index; i < c.series.values.size(); ++i)
                returns = returns || c.series.values[i].log_negativity < entanglement_floor;
        }
        e["returns_below_floor_after_peak"] = returns;
        e["hp_max_ratio"] = c.series.hp.overall_max();
        e["hp_threshold"] = HpValidityReport::threshold;
        e["hp_threshold_exceeded"] = c.series.hp.exceeds_threshold;
        e["max_symplectic_residual"] = c.max_symplectic_residual;
        curves.push_back(e);
        maxima.emplace_back(c.max_log_negativity);
        onsets.push_back(c.onset);
    }
    j["curves"] = curves;
    if (result.config.sweep) {
        j["sweep"] = {{"parameter", result.config.sweep->parameter},
                      {"max_logneg_trend", trend(maxima)},
                      {"onset_trend", trend(onsets)}};
    }
    return j;
}

// ---------------------------------------------------------------------------
// Oracle

OracleReport run_oracle(const ExperimentConfig& config)
{
    OracleReport report;
    report.config = config;
    report.ladder = oracle_convergence(config.oracle.ladder);

    PhysicalParams p;
    p.g = config.params.g;
    p.N1 = p.N2 = config.oracle.scan_N;
    p.omega = p.omega0 = config.oracle.scan_omega_factor * critical_omega_resonant(p.g, config.oracle.scan_N);
    p.phi = config.params.phi;
    report.scan_params = p;
    report.scan = exact_negativity_scan(p, config.oracle.scan_cutoff,
                                        uniform_grid(0.0, config.oracle.scan_stop, config.oracle.scan_points));
    return report;
}

void write_csv(std::ostream& out, const OracleReport& report)
{
    out << "N,g,omega_over_gref,G,gt_ref,photon_cutoff,cutoff_change,converged,max_cov_deviation\n";
    for (const auto& pt : report.ladder.points)
        out << fmt::format("{},{:.17g},{:.17g},{:.17g},{:.12g},{},{:.6e},{},{:.17g}\n", pt.N, pt.g,
                           report.ladder.omega, report.ladder.collective, report.config.oracle.ladder.time,
                           pt.photon_cutoff, pt.cutoff_change, pt.converged ? 1 : 0, pt.max_deviation);
}

void write_scan_csv(std::ostream& out, const OracleReport& report)
{
    const auto& p = report.scan_params;
    out << "N,omega_over_g,photon_cutoff,gt,exact_logneg_bits\n";
    for (std::size_t i = 0; i < report.scan.times.size(); ++i)
        out << fmt::format("{},{:.17g},{},{:.12g},{:.17g}\n", p.N1, p.omega, report.scan.photon_cutoff,
                           report.scan.times[i], report.scan.values[i]);
}

void write_svg(std::ostream& out, const OracleReport& report)
{
    render_svg(out, fmt::format("exact negativity, N = {} per ensemble", report.scan_params.N1), "g t",
               "log2 trace norm of partial transpose", {{"exact", report.scan.times, report.scan.values}});
}

json summary_json(const OracleReport& report)
{
    json j;
    j["name"] = report.config.name;
    j["kind"] = "oracle";
    j["ladder"] = {{"omega_over_gref", report.ladder.omega},
                   {"collective_coupling", report.ladder.collective},
                   {"coupling_fraction", report.config.oracle.ladder.coupling_fraction},
                   {"time_gref", report.config.oracle.ladder.time},
                   {"monotone_decreasing", report.ladder.monotone_decreasing()},
                   {"all_converged", report.ladder.all_converged()}};
    json pts = json::array();
    for (const auto& pt : report.ladder.points)
        pts.push_back({{"N", pt.N},
                       {"g", pt.g},
                       {"photon_cutoff", pt.photon_cutoff},
                       {"cutoff_change", pt.cutoff_change},
                       {"converged", pt.converged},
                       {"max_cov_deviation", pt.max_deviation}});
    j["ladder"]["points"] = pts;
    j["vacuum_scan"] = {{"params", params_json(report.scan_params)},
                        {"photon_cutoff", report.scan.photon_cutoff},
                        {"window_stop", report.config.oracle.scan_stop},
                        {"max_logneg_bits", report.scan.max_value},
                        {"t_at_max", report.scan.t_at_max}};
    return j;
}

// ---------------------------------------------------------------------------
// Readout

ReadoutReport run_readout(const ExperimentConfig& config)
{
    if (config.sweep)
        throw ConfigError("readout experiments take a single parameter point (remove sweep)");
    const PhysicalParams& p = config.params;
    const QuadraticHamiltonian H = build_hamiltonian(p);
    const GaussianState state0 = initial_state(p);
    const auto grid = config.grid.values();
    const auto series = entanglement_trajectory(H, state0, grid, config.propagator);
    const auto peak = first_peak(grid, series.log_negativities());
    if (!peak)
        throw NumericalError("readout: no entanglement peak on the time grid");

    const GaussianState at_peak = evolve(state0, make_propagator(H, peak->t, config.propagator));
    const std::array<std::string, 2> ensembles{ensemble1_label, ensemble2_label};
    const GaussianState reduced = partial_trace(at_peak, ensembles);
    const std::array<double, 2> freqs{p.omega, p.omega};
    GaussianState dimensionless = to_readout_units(reduced, freqs);
    dimensionless = GaussianState(readout_layout(), dimensionless.mean(), dimensionless.cov());

    const GaussianState detected = apply_readout_channel(dimensionless, config.readout.channel);
    const HomodyneRecord record = measure(detected, config.readout.samples_per_setting, config.seed);
    const auto variances = estimate_variances(record);

    const auto truth = log_negativity(dimensionless, Partition{{"mode-1"}, {"mode-2"}});
    ReadoutReport report{config, peak->t, dimensionless, reconstruct_covariance(variances, config.readout.channel),
                         estimate_entanglement(variances, config.readout.channel, config.readout.error_draws,
                                               setting_seed(config.seed, 1000)),
                         truth.log_negativity,
                         *std::min_element(truth.pt_spectrum.begin(), truth.pt_spectrum.end())};
    return report;
}

void write_csv(std::ostream& out, const ReadoutReport& report)
{
    const auto& p = report.config.params;
    const auto& ch = report.config.readout.channel;
    const std::string prefix = fmt::format("{:.12g},{},{:.12g},{:.12g},{},{}", p.omega, molecules_field(p), ch.eta1,
                                           ch.eta2, report.config.readout.samples_per_setting, report.config.seed);
    out << "omega_over_g,N,eta1,eta2,samples_per_setting,seed,quantity,true_value,estimate,std_error\n";
    constexpr std::array<const char*, 4> names{"x1", "p1", "x2", "p2"};
    for (int r = 0; r < 4; ++r)
        for (int c = r; c < 4; ++c)
            out << fmt::format("{},sigma_{}{},{:.17g},{:.17g},{:.17g}\n", prefix, names[static_cast<std::size_t>(r)],
                               names[static_cast<std::size_t>(c)], report.true_state.cov()(r, c),
                               report.reconstruction.cov(r, c), report.reconstruction.std_error(r, c));
    out << fmt::format("{},logneg_bits,{:.17g},{:.17g},{:.17g}\n", prefix, report.true_log_negativity,
                       report.estimate.log_negativity, report.estimate.log_negativity_std_error);
    out << fmt::format("{},min_pt_symplectic_eigenvalue,{:.17g},{:.17g},{:.17g}\n", prefix,
                       report.true_min_pt_eigenvalue, report.estimate.min_pt_eigenvalue, report.estimate.min_pt_std_error);
}

void write_svg(std::ostream& out, const ReadoutReport& report)
{
    // Bar-free comparison of the ten independent covariance entries: true (x) vs estimate (y).
    PlotSeries truth{"true", {}, {}}, estimate{"reconstructed", {}, {}};
    double k = 0.0;
    for (int r = 0; r < 4; ++r)
        for (int c = r; c < 4; ++c, k += 1.0) {
            truth.x.push_back(k);
            truth.y.push_back(report.true_state.cov()(r, c));
            estimate.x.push_back(k);
            estimate.y.push_back(report.reconstruction.cov(r, c));
        }
    render_svg(out, "readout: covariance entries (upper triangle, row-major)", "entry", "sigma", {truth, estimate});
}

json summary_json(const ReadoutReport& report)
{
    const double diff = report.estimate.log_negativity - report.true_log_negativity;
    json j;
    j["name"] = report.config.name;
    j["kind"] = "readout";
    j["params"] = params_json(report.config.params);
    j["eta1"] = report.config.readout.channel.eta1;
    j["eta2"] = report.config.readout.channel.eta2;
    j["samples_per_setting"] = report.config.readout.samples_per_setting;
    j["seed"] = report.config.seed;
    j["peak_time"] = report.peak_time;
    j["bias_corrected"] = report.reconstruction.bias_corrected;
    j["true_logneg_bits"] = report.true_log_negativity;
    j["estimated_logneg_bits"] = report.estimate.log_negativity;
    j["logneg_std_error"] = report.estimate.log_negativity_std_error;
    j["abs_error_bits"] = std::abs(diff);
    j["within_3_std_errors"] = std::abs(diff) <= 3.0 * report.estimate.log_negativity_std_error;
    j["true_min_pt_symplectic_eigenvalue"] = report.true_min_pt_eigenvalue;
    j["min_pt_symplectic_eigenvalue"] = report.estimate.min_pt_eigenvalue;
    j["min_pt_std_error"] = report.estimate.min_pt_std_error;
    j["entanglement_verified_3sigma"] = report.estimate.verified(3.0);
    return j;
}

// ---------------------------------------------------------------------------

OutputFormat parse_output_format(std::string_view name)
{
    if (name == "csv")
        return OutputFormat::csv;
    if (name == "svg")
        return OutputFormat::svg;
    if (name == "both")
        return OutputFormat::both;
    throw ConfigError(fmt::format("unknown format '{}' (expected csv, svg or both)", name));
}

namespace {

template <class Writer>
std::filesystem::path write_file(const std::filesystem::path& path, Writer&& writer)
{
    if (path.has_parent_path())
        std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw Error(fmt::format("cannot write '{}'", path.string()));
    writer(out);
    out.flush();
    if (!out)
        throw Error(fmt::format("failed writing '{}'", path.string()));
    return path;
}

} // namespace

std::vector<std::filesystem::path> run_experiment(const ExperimentConfig& config, const std::filesystem::path& out_dir,
                                                  OutputFormat format)
{
    const OutputPaths paths = config.resolved_outputs();
    const bool csv = format != OutputFormat::svg;
    const bool svg = format != OutputFormat::csv;
    std::vector<std::filesystem::path> written;

    auto emit = [&](const auto& report, auto&& extra) {
        if (csv)
            written.push_back(write_file(out_dir / paths.csv, [&](std::ostream& o) { write_csv(o, report); }));
        extra();
        if (svg)
            written.push_back(write_file(out_dir / paths.svg, [&](std::ostream& o) { write_svg(o, report); }));
        written.push_back(write_file(out_dir / paths.summary,
                                     [&](std::ostream& o) { o << summary_json(report).dump(2) << "\n"; }));
    };

    switch (config.kind) {
    case ExperimentKind::entanglement:
        emit(run_entanglement(config), [] {});
        break;
    case ExperimentKind::oracle: {
        const OracleReport report = run_oracle(config);
        emit(report, [&] {
            if (!csv)
                return;
            auto scan = std::filesystem::path(paths.csv);
            scan.replace_filename(scan.stem().string() + "_scan" + scan.extension().string());
            written.push_back(write_file(out_dir / scan, [&](std::ostream& o) { write_scan_csv(o, report); }));
        });
        break;
    }
    case ExperimentKind::readout:
        emit(run_readout(config), [] {});
        break;
    }
    return written;
}

} // namespace vacent
