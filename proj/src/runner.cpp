#include "fieldlab/runner.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <ostream>
#include <sstream>

#include "fieldlab/conditions.hpp"
#include "fieldlab/descriptors.hpp"
#include "fieldlab/envelope.hpp"
#include "fieldlab/errors.hpp"
#include "fieldlab/format.hpp"
#include "fieldlab/functionals.hpp"
#include "fieldlab/profile_cache.hpp"

namespace fieldlab {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Acceptance levels used by the verify task.
constexpr double kIdentityTol = 1e-5;
constexpr double kStrongTol = 1e-4;
constexpr double kTailTol = 1e-4;

double positive(const json& j, const char* key, double fallback)
{
    if (!j.contains(key))
        return fallback;
    if (!j[key].is_number() || !(j[key].get<double>() > 0.0))
        throw ConfigError(std::string("options.") + key + " must be a positive number");
    return j[key].get<double>();
}

std::vector<double> parse_q_grid(const json& j)
{
    std::vector<double> q;
    if (j.is_array()) {
        for (const auto& v : j) {
            if (!v.is_number())
                throw ConfigError("q_grid entries must be numbers");
            q.push_back(v.get<double>());
        }
    } else if (j.is_object()) {
        const double from = positive(j, "from", 0.0), to = positive(j, "to", 0.0);
        const int count = j.value("count", 0);
        if (!(from > 0.0) || !(to > from) || count < 2)
            throw ConfigError("q_grid range needs 0 < from < to and count >= 2");
        const bool log = j.value("spacing", std::string("log")) == "log";
        for (int i = 0; i < count; ++i) {
            const double s = double(i) / (count - 1);
            q.push_back(log ? from * std::pow(to / from, s) : from + (to - from) * s);
        }
    } else {
        throw ConfigError("q_grid must be an array or a {from,to,count} range");
    }
    for (std::size_t i = 0; i < q.size(); ++i) {
        if (!(q[i] > 0.0) || !std::isfinite(q[i]))
            throw ConfigError("q_grid values must be positive");
        if (i > 0 && !(q[i] > q[i - 1]))
            throw ConfigError("q_grid must be strictly increasing");
    }
    return q;
}

std::ofstream open_out(const RunConfig& c, const std::string& name, std::ostream& log)
{
    std::error_code ec;
    fs::create_directories(c.out_dir, ec);
    const fs::path p = c.out_dir / name;
    std::ofstream out(p);
    if (!out)
        throw ConfigError("cannot write " + p.string());
    log << "wrote " << p.string() << '\n';
    return out;
}

json reports_json(const std::vector<ConditionReport>& reports)
{
    json arr = json::array();
    for (const auto& r : reports) {
        json ev = json::array();
        for (auto [t, v] : r.evidence)
            ev.push_back({t, v});
        arr.push_back({{"condition", std::string(to_string(r.condition_id))},
                       {"verdict", std::string(to_string(r.verdict))},
                       {"message", r.message},
                       {"evidence", ev}});
    }
    return arr;
}

NonlinearityPtr make_f(const RunConfig& c) { return nonlinearity_from_json(c.f, c.dimension); }

double envelope_extent(const RunConfig& c, const Nonlinearity& f, double sup_v)
{
    return c.envelope_max.value_or(std::max({1.1 * sup_v, 2.0 * f.zeta(), 1.0}));
}

// Envelope and m0 entering K for the configured problem. For an auxiliary
// nonlinearity this is the envelope it was built from.
std::optional<std::pair<Envelope, double>> k_envelope(const RunConfig& c, const NonlinearityPtr& f, double sup_v)
{
    try {
        if (c.f.value("family", std::string()) == "aux") {
            const NonlinearityPtr src = nonlinearity_from_json(c.f.at("source"), c.dimension);
            const double p0 = c.f.value("p0", default_p0(c.dimension));
            const double tmax = c.f.value("grid_max", 1e3 * std::max(1.0, src->zeta()));
            const auto n = c.f.value("grid_points", std::size_t(20001));
            return std::pair{build_envelope(src, p0, uniform_grid(tmax, n), c.dimension), c.f.value("m0", 1.0)};
        }
        const double m0 = kirchhoff_from_json(c.M).m0();
        const double p0 = c.p0.value_or(default_p0(c.dimension));
        return std::pair{
            build_envelope(f, p0, uniform_grid(envelope_extent(c, *f, sup_v), c.envelope_points), c.dimension), m0};
    } catch (const std::invalid_argument&) {
        return std::nullopt;
    }
}

int task_check(const RunConfig& c, std::ostream& log)
{
    const NonlinearityPtr f = make_f(c);
    const KirchhoffFunction M = kirchhoff_from_json(c.M);
    const auto fr = check_f_conditions(*f, c.dimension);
    const auto mr = check_m_conditions(M, c.dimension);
    json doc = {{"dimension", c.dimension}, {"f", f->descriptor()}, {"M", M.descriptor()},
                {"f_conditions", reports_json(fr)}, {"M_conditions", reports_json(mr)}};
    open_out(c, "conditions.json", log) << doc.dump(2) << '\n';
    for (const auto* rs : {&fr, &mr})
        for (const auto& r : *rs)
            log << to_string(r.condition_id) << ": " << to_string(r.verdict) << '\n';
    return kExitOk;
}

int task_envelope(const RunConfig& c, std::ostream& log)
{
    const NonlinearityPtr f = make_f(c);
    const double p0 = c.p0.value_or(default_p0(c.dimension));
    const Envelope e =
        build_envelope(f, p0, uniform_grid(envelope_extent(c, *f, 0.0), c.envelope_points), c.dimension);
    auto csv = open_out(c, "envelope.csv", log);
    e.write_csv(csv);
    const auto reports = verify_envelope_lemmas(e, *f);
    json doc = {{"p0", p0}, {"delta", e.delta()}, {"omega", e.omega()}, {"reports", reports_json(reports)}};
    open_out(c, "envelope_lemmas.json", log) << doc.dump(2) << '\n';
    for (const auto& r : reports)
        log << to_string(r.condition_id) << ": " << to_string(r.verdict) << '\n';
    return kExitOk;
}

int task_solve(const RunConfig& c, std::ostream& log)
{
    const SolutionFamily fam = cached_family(c, log);
    const NonlinearityPtr f = fam.profiles.empty() ? make_f(c) : fam.profiles[0].f;
    const KirchhoffFunction M = kirchhoff_from_json(c.M);
    const KirchhoffFunction one = make_constant_m(1.0);
    double sup_v = 0.0;
    for (const auto& p : fam.profiles)
        sup_v = std::max(sup_v, p.max_abs());
    const auto env = k_envelope(c, f, sup_v);

    auto out = open_out(c, "solve.csv", log);
    out << "n,nodes,s,grad_norm_sq,l2_norm_sq,integral_F,I,J,K,pohozaev,nehari,strong_sup\n";
    for (std::size_t i = 0; i < fam.profiles.size(); ++i) {
        const RadialProfile& p = fam.profiles[i];
        const FunctionalReport r = evaluate_functionals(p, M, one, env ? &env->first : nullptr, env ? env->second : 1.0);
        out << i + 1 << ',' << p.node_count << ',' << fmt17(p.shoot_height) << ',' << fmt17(r.grad_norm_sq) << ','
            << fmt17(r.l2_norm_sq) << ',' << fmt17(r.integral_F) << ',' << fmt17(r.energy_sf) << ','
            << fmt17(r.energy_kt) << ',' << (r.energy_aux ? fmt17(*r.energy_aux) : std::string()) << ','
            << fmt17(r.pohozaev_residual) << ',' << fmt17(r.nehari_residual) << ',' << fmt17(r.strong_residual_sup)
            << '\n';
    }
    log << fam.profiles.size() << " profiles solved\n";
    return kExitOk;
}

int task_transfer(const RunConfig& c, std::ostream& log)
{
    const SolutionFamily fam = cached_family(c, log);
    const KirchhoffFunction M = kirchhoff_from_json(c.M);
    json results = json::array();
    auto csv = open_out(c, "transfer.csv", log);
    csv << "n,nodes,root,t,kt_grad,J,h_residual,strong_residual,nehari_residual\n";
    for (std::size_t i = 0; i < fam.profiles.size(); ++i) {
        const TransferResult r = solve_transfer(fam.profiles[i], M, c.transfer);
        json roots = json::array();
        for (std::size_t k = 0; k < r.roots.size(); ++k) {
            const auto& d = r.diagnostics[k];
            const double J = energy_kt(r.profiles[k], M);
            roots.push_back({{"t", r.roots[k]},
                             {"kt_grad_norm_sq", r.kirchhoff_grad_norms[k]},
                             {"J", J},
                             {"h_residual", d.h_residual},
                             {"strong_residual", d.strong_residual},
                             {"nehari_residual", d.nehari_residual}});
            csv << i + 1 << ',' << fam.profiles[i].node_count << ',' << k + 1 << ',' << fmt17(r.roots[k]) << ','
                << fmt17(r.kirchhoff_grad_norms[k]) << ',' << fmt17(J) << ',' << fmt17(d.h_residual) << ','
                << fmt17(d.strong_residual) << ',' << fmt17(d.nehari_residual) << '\n';
        }
        results.push_back({{"n", i + 1},
                           {"nodes", fam.profiles[i].node_count},
                           {"grad_norm_sq_v", r.grad_norm_sq_v},
                           {"roots", roots},
                           {"rejected", r.rejected}});
        log << "v" << i + 1 << ": " << r.roots.size() << " root(s)\n";
    }
    open_out(c, "transfer.json", log) << json{{"M", M.descriptor()}, {"results", results}}.dump(2) << '\n';
    if (M.decomposition() && c.dimension >= 3 && !fam.profiles.empty()) {
        json th = json::array();
        for (int n = 1; n <= int(fam.profiles.size()); ++n)
            th.push_back(threshold_report(M, fam.profiles, n));
        open_out(c, "threshold.json", log) << th.dump(2) << '\n';
    }
    return kExitOk;
}

int task_sweep(const RunConfig& c, std::ostream& log)
{
    if (c.q_grid.empty())
        throw ConfigError("sweep needs a q_grid");
    const KirchhoffFamily family = kirchhoff_family_from_json(c.M);
    const SolutionFamily fam = cached_family(c, log);
    const MultiplicityTable table = multiplicity_sweep(family, fam.profiles, c.q_grid, c.transfer);
    auto csv = open_out(c, "sweep.csv", log);
    write_sweep_csv(csv, table);
    if (!table.q_thresholds.empty()) {
        const KirchhoffFunction M = family.at(c.q_grid.front());
        json th = json::array();
        for (int n = 1; n <= int(fam.profiles.size()); ++n)
            th.push_back(threshold_report(M, fam.profiles, n));
        open_out(c, "threshold.json", log) << th.dump(2) << '\n';
    }
    log << table.rows.size() << " q values swept\n";
    return kExitOk;
}

int task_verify(const RunConfig& c, std::ostream& log)
{
    const ProfileCache cache(c.cache_dir);
    const KirchhoffFunction one = make_constant_m(1.0);
    int verified = 0;
    std::vector<std::string> problems;
    for (const fs::path& path : cache.entries()) {
        std::ifstream in(path);
        json doc;
        try {
            doc = json::parse(in);
        } catch (const json::exception& e) {
            problems.push_back(path.filename().string() + ": unreadable (" + e.what() + ")");
            continue;
        }
        const int N = doc.value("dimension", 0);
        const NonlinearityPtr f = nonlinearity_from_json(doc.at("f"), N);
        RadialProfile p = profile_from_json(doc, f);
        const std::string tag = path.filename().string();
        try {
            check_profile_invariants(p);
        } catch (const InvariantViolation& e) {
            problems.push_back(tag + ": " + e.what());
            continue;
        }
        if (!p.tail) {
            problems.push_back(tag + ": no tail model");
            continue;
        }
        const double logd_int = p.derivs.back() / p.values.back();
        const double logd_tail = p.tail->log_derivative(N, p.radii.back());
        const double tail_gap = std::abs(logd_int - logd_tail) / std::abs(logd_tail);
        const FunctionalReport r = evaluate_functionals(p, one, one);
        std::ostringstream bad;
        if (!(std::abs(r.pohozaev_residual) < kIdentityTol))
            bad << " pohozaev " << fmt17(r.pohozaev_residual);
        if (!(std::abs(r.nehari_residual) < kIdentityTol))
            bad << " nehari " << fmt17(r.nehari_residual);
        if (!(r.strong_residual_sup < kStrongTol))
            bad << " strong " << fmt17(r.strong_residual_sup);
        if (!(tail_gap < kTailTol))
            bad << " tail " << fmt17(tail_gap);
        if (!bad.str().empty())
            problems.push_back(tag + ":" + bad.str());
        else
            ++verified;
    }
    log << verified << " profiles verified\n";
    for (const auto& s : problems)
        log << "violation: " << s << '\n';
    return problems.empty() ? kExitOk : kExitInvariant;
}

} // namespace

Task parse_task(const std::string& name)
{
    if (name == "check")
        return Task::Check;
    if (name == "solve")
        return Task::Solve;
    if (name == "envelope")
        return Task::Envelope;
    if (name == "transfer")
        return Task::Transfer;
    if (name == "sweep")
        return Task::Sweep;
    if (name == "verify")
        return Task::Verify;
    throw ConfigError("unknown task '" + name + "'");
}

std::string to_string(Task t)
{
    switch (t) {
    case Task::Check: return "check";
    case Task::Solve: return "solve";
    case Task::Envelope: return "envelope";
    case Task::Transfer: return "transfer";
    case Task::Sweep: return "sweep";
    case Task::Verify: return "verify";
    }
    return "?";
}

void apply_override(json& doc, const std::string& assignment)
{
    const auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0)
        throw ConfigError("--set expects key=value, got '" + assignment + "'");
    const std::string key = assignment.substr(0, eq), text = assignment.substr(eq + 1);
    json value;
    try {
        value = json::parse(text);
    } catch (const json::exception&) {
        value = text;
    }
    json* node = &doc;
    std::size_t start = 0;
    while (true) {
        const auto dot = key.find('.', start);
        const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
        if (part.empty())
            throw ConfigError("empty path component in '" + key + "'");
        if (!node->is_object() && !node->is_null())
            throw ConfigError("'" + key + "' descends into a non-object");
        if (dot == std::string::npos) {
            (*node)[part] = value;
            return;
        }
        node = &(*node)[part];
        start = dot + 1;
    }
}

RunConfig parse_config(const json& doc, Task task)
{
    if (!doc.is_object())
        throw ConfigError("configuration must be a JSON object");
    RunConfig c;
    c.task = task;
    try {
        c.dimension = doc.value("dimension", 3);
        if (c.dimension < 2)
            throw ConfigError("dimension must be >= 2");
        if (task != Task::Verify) {
            if (!doc.contains("f"))
                throw ConfigError("configuration needs an 'f' descriptor");
            c.f = doc["f"];
        }
        if (doc.contains("M"))
            c.M = doc["M"];
        if (doc.contains("q_grid"))
            c.q_grid = parse_q_grid(doc["q_grid"]);
        else if (doc.contains("q_values"))
            c.q_grid = parse_q_grid(doc["q_values"]);

        const json opts = doc.value("options", json::object());
        if (!opts.is_object())
            throw ConfigError("options must be an object");
        c.n_max = opts.value("n_max", c.n_max);
        if (c.n_max < 1 || c.n_max > c.shooting.family_cap)
            throw ConfigError("options.n_max must lie in [1, " + std::to_string(c.shooting.family_cap) + "]");
        auto& io = c.shooting.integrator;
        io.abs_tol = positive(opts, "abs_tol", io.abs_tol);
        io.rel_tol = positive(opts, "rel_tol", io.rel_tol);
        io.max_step = positive(opts, "max_step", io.max_step);
        c.shooting.bisection_tol = positive(opts, "bisection_tol", c.shooting.bisection_tol);
        if (opts.contains("p0"))
            c.p0 = positive(opts, "p0", 0.0);
        if (opts.contains("envelope_max"))
            c.envelope_max = positive(opts, "envelope_max", 0.0);
        c.envelope_points = std::size_t(positive(opts, "envelope_points", double(c.envelope_points)));
        c.transfer.t_min = positive(opts, "t_min", c.transfer.t_min);
        c.transfer.t_max = positive(opts, "t_max", c.transfer.t_max);
        c.transfer.t_floor = positive(opts, "t_floor", c.transfer.t_floor);
        c.transfer.panels = int(positive(opts, "panels", c.transfer.panels));
        if (!(c.transfer.t_max > c.transfer.t_min))
            throw ConfigError("options.t_max must exceed options.t_min");

        if (doc.contains("cache_dir"))
            c.cache_dir = doc["cache_dir"].get<std::string>();
        if (doc.contains("out_dir"))
            c.out_dir = doc["out_dir"].get<std::string>();
    } catch (const json::exception& e) {
        throw ConfigError(std::string("bad configuration: ") + e.what());
    }
    if (const char* env = std::getenv("FIELDLAB_CACHE"); env && *env)
        c.cache_dir = env;
    return c;
}

SolutionFamily cached_family(const RunConfig& c, std::ostream& log)
{
    const NonlinearityPtr f = make_f(c);
    const ProfileCache cache(c.cache_dir);
    SolutionFamily fam;
    bool complete = true;
    for (int n = 0; n < c.n_max && complete; ++n) {
        const auto doc = cache.load(cache_key(f->descriptor(), c.dimension, n, c.shooting));
        if (!doc) {
            complete = false;
            break;
        }
        RadialProfile p = profile_from_json(*doc, f);
        check_profile_invariants(p);
        fam.profiles.push_back(attach_norms(std::move(p)));
    }
    if (complete) {
        log << "profile cache hit for " << c.n_max << " profiles\n";
        for (std::size_t n = 1; n < fam.profiles.size(); ++n)
            if (!(grad_norm_sq(fam.profiles[n]) > grad_norm_sq(fam.profiles[n - 1])))
                fam.gradient_order_strict = false;
        return fam;
    }
    fam = solution_family(f, c.dimension, c.n_max, c.shooting);
    for (const auto& w : fam.warnings)
        log << "warning: " << w << '\n';
    for (const auto& p : fam.profiles)
        cache.store(cache_key(f->descriptor(), c.dimension, p.node_count, c.shooting),
                    profile_to_json(p, c.shooting));
    return fam;
}

int run(const RunConfig& config, std::ostream& log)
{
    try {
        std::optional<CacheLock> lock;
        if (config.task != Task::Check && config.task != Task::Envelope)
            lock.emplace(config.cache_dir);
        switch (config.task) {
        case Task::Check: return task_check(config, log);
        case Task::Envelope: return task_envelope(config, log);
        case Task::Solve: return task_solve(config, log);
        case Task::Transfer: return task_transfer(config, log);
        case Task::Sweep: return task_sweep(config, log);
        case Task::Verify: return task_verify(config, log);
        }
    } catch (const InvariantViolation& e) {
        log << "invariant violation: " << e.what() << '\n';
        return kExitInvariant;
    } catch (const NumericalFailure& e) {
        log << "numerical failure: " << e.what() << '\n';
        return kExitNumerical;
    } catch (const std::invalid_argument& e) {
        log << "configuration error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::exception& e) {
        log << "numerical failure: " << e.what() << '\n';
        return kExitNumerical;
    }
    return kExitConfig;
}

} // namespace fieldlab
