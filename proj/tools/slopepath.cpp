#include <slopepath/datagen.hpp>
#include <slopepath/error.hpp>
#include <slopepath/experiment.hpp>
#include <slopepath/io.hpp>
#include <slopepath/kernels.hpp>
#include <slopepath/optimality.hpp>
#include <slopepath/path_engine.hpp>
#include <slopepath/prox.hpp>
#include <slopepath/weights.hpp>

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>

using namespace slopepath;
using nlohmann::json;

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitNumerical = 3;

struct Globals {
    std::uint64_t seed = 1;
    int threads = 1;
    std::string format = "csv";
    std::string config;
};

json vector_json(const Vector& v)
{
    json arr = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        arr.push_back(std::isfinite(v[i]) ? json(v[i]) : json(nullptr));
    }
    return arr;
}

json report_json(const OptimalityReport& r)
{
    json margins = json::array();
    for (const auto& m : r.slackMargins) margins.push_back({{"g", m.group}, {"k", m.k}, {"margin", m.margin}});
    return json{{"optimal", r.optimal},
                {"tol_eq", r.tolEq},
                {"tol_ineq", r.tolIneq},
                {"cond1_residuals", r.cond1Residuals},
                {"slack_margins", margins},
                {"worst_violation",
                 {{"condition", r.worstViolation.condition},
                  {"g", r.worstViolation.group},
                  {"k", r.worstViolation.k},
                  {"magnitude", r.worstViolation.magnitude}}}};
}

std::ofstream open_out(const std::string& path)
{
    std::ofstream out(path);
    if (!out) throw Error(ErrorCode::ParseError, "cannot write " + path);
    return out;
}

// Weight vector from either a file or a named design.
struct WeightArgs {
    std::string file;
    std::string design;
    double q = -1.0;  // negative: design default
    long n = 0;

    bool has_design() const { return !design.empty(); }

    Vector resolve(long p, long nDefault) const
    {
        if (!file.empty()) {
            Vector w = io::read_vector(file);
            if (w.size() != p) {
                throw Error(ErrorCode::DimensionMismatch, "weights file has " + std::to_string(w.size())
                                                              + " entries, expected " + std::to_string(p));
            }
            return w;
        }
        if (design.empty()) throw Error(ErrorCode::InvalidDimension, "give a weights file or a design");
        WeightDesign d;
        d.kind = design_from_string(design);
        d.q = q >= 0.0 ? q : (d.kind == DesignKind::Oscar ? 1.0 : 0.1);
        d.n = n > 0 ? n : nDefault;
        return design_sequence(d, p);
    }
};

void add_design_options(CLI::App* cmd, WeightArgs& w, bool withN)
{
    cmd->add_option("--design", w.design, "weight design")->check(CLI::IsMember({"bh", "gauss", "oscar", "qs"}));
    cmd->add_option("--q", w.q, "FDR level (bh, gauss) or offset (oscar); default 0.1, oscar 1");
    if (withN) cmd->add_option("--n", w.n, "sample count for the gauss design (default: rows of the instance)");
}

// --config support: the JSON file is turned into command-line tokens. Keys
// given explicitly on the command line are skipped, so flags override the
// file. Top-level scalars are global flags; an object keyed by a subcommand
// name holds that subcommand's flags.
std::vector<std::string> config_tokens(const json& node, const std::set<std::string>& given)
{
    std::vector<std::string> out;
    for (const auto& [key, value] : node.items()) {
        if (value.is_object()) continue;
        std::string flag = "--" + key;
        std::replace(flag.begin(), flag.end(), '_', '-');
        if (given.count(flag)) continue;
        if (value.is_boolean()) {
            if (value.get<bool>()) out.push_back(flag);
        } else if (value.is_array()) {
            for (const auto& item : value) {
                out.push_back(flag);
                out.push_back(item.is_string() ? item.get<std::string>() : item.dump());
            }
        } else if (!value.is_null()) {
            out.push_back(flag);
            out.push_back(value.is_string() ? value.get<std::string>() : value.dump());
        }
    }
    return out;
}

std::vector<std::string> expand_config(const std::vector<std::string>& args, const std::vector<std::string>& subcommands)
{
    std::string path;
    for (std::size_t i = 1; i < args.size(); ++i) {
        if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
        if (args[i].rfind("--config=", 0) == 0) path = args[i].substr(9);
    }
    if (path.empty()) return args;
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::ParseError, "cannot open config " + path);
    json cfg;
    try {
        cfg = json::parse(in);
    } catch (const json::exception& e) {
        throw Error(ErrorCode::ParseError, "config " + path + ": " + e.what());
    }
    if (!cfg.is_object()) throw Error(ErrorCode::ParseError, "config must be a JSON object");

    std::size_t subPos = args.size();
    for (std::size_t i = 1; i < args.size() && subPos == args.size(); ++i) {
        if (std::find(subcommands.begin(), subcommands.end(), args[i]) != subcommands.end()) subPos = i;
    }
    std::set<std::string> given;
    for (std::size_t i = 1; i < args.size(); ++i) {
        if (args[i].rfind("--", 0) == 0) given.insert(args[i].substr(0, args[i].find('=')));
    }
    std::vector<std::string> out{args[0]};
    for (auto& t : config_tokens(cfg, given)) out.push_back(std::move(t));
    out.insert(out.end(), args.begin() + 1, args.begin() + static_cast<std::ptrdiff_t>(std::min(subPos + 1, args.size())));
    if (subPos < args.size() && cfg.contains(args[subPos]) && cfg[args[subPos]].is_object()) {
        for (auto& t : config_tokens(cfg[args[subPos]], given)) out.push_back(std::move(t));
    }
    if (subPos + 1 < args.size()) out.insert(out.end(), args.begin() + static_cast<std::ptrdiff_t>(subPos + 1), args.end());
    return out;
}

std::pair<int, int> parse_size(const std::string& text)
{
    const auto x = text.find_first_of("xX,:");
    if (x == std::string::npos) throw Error(ErrorCode::ParseError, "size must look like PxN, got '" + text + "'");
    try {
        return {std::stoi(text.substr(0, x)), std::stoi(text.substr(x + 1))};
    } catch (const std::exception&) {
        throw Error(ErrorCode::ParseError, "size must look like PxN, got '" + text + "'");
    }
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Exact solution paths of sorted-L1 penalized regression and weight designs"};
    app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    app.require_subcommand(1);
    app.fallthrough();

    Globals g;
    app.add_option("--seed", g.seed, "random seed (simulate, bench, solver power iteration)");
    app.add_option("--threads", g.threads, "worker threads")->check(CLI::PositiveNumber);
    app.add_option("--format", g.format, "output format")->check(CLI::IsMember({"csv", "json"}));
    app.add_option("--config", g.config, "JSON file with flag values; explicit flags override it");

    // weights
    auto* weightsCmd = app.add_subcommand("weights", "print an ascending weight sequence");
    WeightArgs wArgs;
    long wP = 0;
    add_design_options(weightsCmd, wArgs, true);
    weightsCmd->get_option("--design")->required();
    weightsCmd->add_option("--p", wP, "dimension")->required()->check(CLI::PositiveNumber);

    // solve
    auto* solveCmd = app.add_subcommand("solve", "solve one sorted-L1 problem by accelerated proximal gradient");
    std::string sInstance, sWeights, sOut;
    double sTol = 1e-9;
    long sMaxIter = 100000;
    bool sBacktrack = false;
    solveCmd->add_option("--instance", sInstance, "instance CSV")->required();
    solveCmd->add_option("--weights", sWeights, "weights file")->required();
    solveCmd->add_option("--tol", sTol, "optimality margin bound, relative to 1 + max weight");
    solveCmd->add_option("--max-iter", sMaxIter, "iteration cap");
    solveCmd->add_flag("--backtracking", sBacktrack, "start from L = 1 and backtrack instead of the power estimate");
    solveCmd->add_option("--out", sOut, "also write beta to this file");

    // check
    auto* checkCmd = app.add_subcommand("check", "optimality report for a candidate beta");
    std::string cInstance, cBeta, cWeights;
    double cTolEq = -1.0, cTolIneq = -1.0;
    checkCmd->add_option("--instance", cInstance, "instance CSV")->required();
    checkCmd->add_option("--beta", cBeta, "candidate beta")->required();
    checkCmd->add_option("--weights", cWeights, "weights file")->required();
    checkCmd->add_option("--tol-eq", cTolEq, "equality tolerance (default 1e-8(1+max weight))");
    checkCmd->add_option("--tol-ineq", cTolIneq, "inequality tolerance (default 1e-8(1+max weight))");

    // path
    auto* pathCmd = app.add_subcommand("path", "trace the exact solution path along lambda0 + eta * lambdabar");
    std::string pInstance, pLambda0, pOut, pEvents;
    WeightArgs pBar;
    double pEtaMax = kInfinity;
    EngineOptions pOpts;
    pathCmd->add_option("--instance", pInstance, "instance CSV")->required();
    add_design_options(pathCmd, pBar, true);
    pathCmd->add_option("--lambda0", pLambda0, "starting weights (default 0)");
    pathCmd->add_option("--lambdabar", pBar.file, "direction weights (instead of --design)");
    pathCmd->add_option("--eta-max", pEtaMax, "stop at this eta (the ordering limit applies anyway)");
    pathCmd->add_option("--out", pOut, "JSON-lines path file")->required();
    pathCmd->add_option("--events", pEvents, "event CSV");
    pathCmd->add_option("--validate-every", pOpts.validateEvery, "structural events between inverse checks (0: never)");
    pathCmd->add_option("--iteration-cap", pOpts.iterationCap, "event cap (default 50 p^2)");
    pathCmd->add_flag("--profile", pOpts.profile, "time events by class");

    // simulate
    auto* simCmd = app.add_subcommand("simulate", "generate a synthetic instance");
    ScenarioSpec spec;
    std::string simOut, simTruth;
    simCmd->add_option("--scenario", spec.scenario, "1 or 2")->check(CLI::IsMember({1, 2}));
    simCmd->add_option("--p", spec.p, "dimension")->check(CLI::PositiveNumber);
    simCmd->add_option("--n", spec.n, "sample count")->check(CLI::PositiveNumber);
    simCmd->add_option("--replicate", spec.replicate, "substream index under the seed");
    simCmd->add_option("--out", simOut, "instance CSV")->required();
    simCmd->add_option("--truth", simTruth, "true beta file");

    // bench
    auto* benchCmd = app.add_subcommand("bench", "simulation study: path statistics over replicates");
    ExperimentConfig ex;
    std::vector<std::string> exSizes{"20x200"};
    std::vector<std::string> exDesigns{"bh", "gauss", "oscar", "qs"};
    double exBhQ = 0.1, exOscarQ = 1.0;
    std::string exJson;
    bool exTimings = false;
    benchCmd->add_option("--scenario", ex.scenario, "1 or 2")->check(CLI::IsMember({1, 2}));
    benchCmd->add_option("--sizes", exSizes, "sizes as PxN")->delimiter(',')->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
    benchCmd->add_option("--designs", exDesigns, "designs")->delimiter(',')->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
    benchCmd->add_option("--replicates", ex.replicates, "datasets per size")->check(CLI::PositiveNumber);
    benchCmd->add_option("--q", exBhQ, "FDR level for bh and gauss");
    benchCmd->add_option("--oscar-q", exOscarQ, "OSCAR offset");
    benchCmd->add_option("--json", exJson, "also write the JSON report here");
    benchCmd->add_flag("--timings", exTimings, "include wall times in JSON");
    benchCmd->add_flag("--include-start", ex.includeStart, "count the eta = 0 state in the averages");

    // contour
    auto* contourCmd = app.add_subcommand("contour", "level set of the penalty in the (beta1, beta2) plane");
    WeightArgs ctArgs;
    long ctP = 2;
    int ctAngles = 360;
    bool ctNormalize = false;
    add_design_options(contourCmd, ctArgs, true);
    contourCmd->add_option("--weights", ctArgs.file, "weights file (instead of --design)");
    contourCmd->add_option("--p", ctP, "dimension for a named design")->check(CLI::Range(2L, 1L << 30));
    contourCmd->add_option("--angles", ctAngles, "directions sampled")->check(CLI::PositiveNumber);
    contourCmd->add_flag("--normalize", ctNormalize, "divide weights by the largest one");

    // sphericity
    auto* sphCmd = app.add_subcommand("sphericity", "rho_p for p = 1..p-max");
    long sphMax = 10000;
    sphCmd->add_option("--p-max", sphMax, "largest p")->check(CLI::PositiveNumber);

    std::vector<std::string> subcommands;
    for (const auto* sub : app.get_subcommands({})) subcommands.push_back(sub->get_name());

    try {
        std::vector<std::string> args(argv, argv + argc);
        args = expand_config(args, subcommands);
        std::vector<std::string> reversed(args.rbegin(), args.rend() - 1);
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitValidation;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitValidation;
    }

    const bool asJson = g.format == "json";
    try {
        if (*weightsCmd) {
            const Vector w = wArgs.resolve(wP, wArgs.n);
            if (asJson) {
                std::cout << json{{"design", wArgs.design}, {"p", wP}, {"weights", vector_json(w)}}.dump() << '\n';
            } else {
                io::write_vector_csv(std::cout, w, "lambda");
            }
        } else if (*solveCmd) {
            const ProblemInstance inst = io::read_instance(sInstance);
            validate_instance(inst);
            const Vector w = io::read_vector(sWeights);
            SolverOptions opts;
            opts.stopTolerance = sTol;
            opts.maxIterations = sMaxIter;
            opts.stepRule = sBacktrack ? StepRule::Backtracking : StepRule::Fixed;
            opts.powerSeed = g.seed;
            const SolveResult res = solve_slope(inst, w, opts);
            if (!sOut.empty()) io::write_vector(sOut, res.beta);
            if (asJson) {
                std::cout << json{{"beta", vector_json(res.beta)},
                                  {"converged", res.converged},
                                  {"iterations", res.iterations},
                                  {"polished", res.polished},
                                  {"objective", res.objective},
                                  {"report", report_json(res.report)}}
                                 .dump(2)
                          << '\n';
            } else {
                io::write_vector_csv(std::cout, res.beta, "beta");
                std::cerr << "converged=" << res.converged << " iterations=" << res.iterations
                          << " worst_violation=" << res.report.worstViolation.magnitude << '\n';
            }
            if (!res.converged) {
                throw Error(ErrorCode::DidNotConverge,
                            "iteration cap reached; best iterate printed, worst violation "
                                + io::format_real(res.report.worstViolation.magnitude));
            }
        } else if (*checkCmd) {
            const ProblemInstance inst = io::read_instance(cInstance);
            const Vector beta = io::read_vector(cBeta);
            const Vector w = io::read_vector(cWeights);
            if (beta.size() != inst.p() || w.size() != inst.p()) {
                throw Error(ErrorCode::DimensionMismatch, "beta and weights must have length p");
            }
            require_ascending_nonnegative(w, "weights");
            CheckOptions opts;
            opts.tolEq = cTolEq;
            opts.tolIneq = cTolIneq;
            const OptimalityReport rep = check_optimality(beta, quadratic_gradient(inst, beta), w, opts);
            if (asJson) {
                std::cout << report_json(rep).dump(2) << '\n';
            } else {
                std::cout << "condition,g,k,value\n";
                for (std::size_t i = 0; i < rep.cond1Residuals.size(); ++i) {
                    std::cout << "1," << (i + 1) << ",1," << io::format_real(rep.cond1Residuals[i]) << '\n';
                }
                for (const auto& m : rep.slackMargins) {
                    std::cout << (m.group == 0 ? 2 : 3) << ',' << m.group << ',' << m.k << ','
                              << io::format_real(m.margin) << '\n';
                }
                std::cout << "# optimal=" << (rep.optimal ? "true" : "false")
                          << " worst=" << io::format_real(rep.worstViolation.magnitude) << '\n';
            }
        } else if (*pathCmd) {
            const ProblemInstance inst = io::read_instance(pInstance);
            const long p = inst.p();
            if (pBar.file.empty() && !pBar.has_design()) {
                throw Error(ErrorCode::InvalidDimension, "path needs --design or --lambdabar");
            }
            WeightRay ray;
            ray.lambdaBar = pBar.resolve(p, inst.n());
            ray.lambda0 = pLambda0.empty() ? Vector::Zero(p) : io::read_vector(pLambda0);
            if (ray.lambda0.size() != p) throw Error(ErrorCode::DimensionMismatch, "lambda0 must have length p");
            ray.etaMax = pEtaMax;
            pOpts.kernelThreads = g.threads;
            pOpts.initialSolver.powerSeed = g.seed;
            const SolutionPath path = run_path(inst, ray, pOpts);
            {
                auto out = open_out(pOut);
                io::write_path_jsonl(out, path);
            }
            if (!pEvents.empty()) {
                auto out = open_out(pEvents);
                io::write_events_csv(out, path);
            }
            const PathMetrics m = path_metrics(path);
            const auto& d = path.diagnostics;
            if (asJson) {
                json summary{{"segments", path.segments.size()},
                             {"events", path.events.size()},
                             {"horizon", std::isfinite(path.horizon()) ? json(path.horizon()) : json(nullptr)},
                             {"fuse", d.fuseEvents},
                             {"split", d.splitEvents},
                             {"switch_order", d.orderSwitchEvents},
                             {"switch_sign", d.signSwitchEvents},
                             {"mean_nonzero_coefficients", m.meanNonzero},
                             {"mean_nonzero_groups", m.meanNonzeroGroups},
                             {"inverse_checks", d.inverseChecks},
                             {"fallback_refactorizations", d.fallbackRefactorizations},
                             {"max_inverse_error", d.maxInverseError}};
                if (pOpts.profile) {
                    summary["switch_seconds"] = d.switchSeconds;
                    summary["fuse_split_seconds"] = d.fuseSplitSeconds;
                }
                std::cout << summary.dump(2) << '\n';
            } else {
                std::cout << "segments,events,fuse,split,switch_order,switch_sign,mean_nonzero,mean_groups\n"
                          << path.segments.size() << ',' << path.events.size() << ',' << d.fuseEvents << ','
                          << d.splitEvents << ',' << d.orderSwitchEvents << ',' << d.signSwitchEvents << ','
                          << io::format_real(m.meanNonzero) << ',' << io::format_real(m.meanNonzeroGroups) << '\n';
            }
        } else if (*simCmd) {
            spec.seed = g.seed;
            const GeneratedData data = generate(spec);
            io::write_instance(simOut, data.instance);
            if (!simTruth.empty()) io::write_vector(simTruth, data.trueBeta);
            std::cerr << "wrote " << data.instance.n() << "x" << data.instance.p() << " instance, hash "
                      << instance_hash(data.instance) << '\n';
        } else if (*benchCmd) {
            ex.sizes.clear();
            for (const auto& s : exSizes) ex.sizes.push_back(parse_size(s));
            ex.designs.clear();
            for (const auto& name : exDesigns) {
                WeightDesign d;
                d.kind = design_from_string(name);
                d.q = d.kind == DesignKind::Oscar ? exOscarQ : exBhQ;
                ex.designs.push_back(d);
            }
            ex.seedBase = g.seed;
            ex.threads = g.threads;
            const ExperimentReport rep = run_experiment(ex);
            const std::string jsonText = report_json(rep, exTimings);
            if (!exJson.empty()) open_out(exJson) << jsonText;
            if (asJson) {
                std::cout << jsonText;
            } else {
                std::cout << report_table(rep);
            }
            for (const auto& c : rep.cells) {
                if (c.replicates == 0) throw Error(ErrorCode::DidNotConverge, "every replicate failed in some cell");
            }
        } else if (*contourCmd) {
            Vector w = ctArgs.resolve(ctArgs.file.empty() ? ctP : io::read_vector(ctArgs.file).size(), ctArgs.n);
            if (ctNormalize && w.size() && w.maxCoeff() > 0.0) w /= w.maxCoeff();
            const Matrix pts = emit_contour(w, ctAngles);
            if (asJson) {
                json rows = json::array();
                for (Eigen::Index r = 0; r < pts.rows(); ++r) rows.push_back({pts(r, 0), pts(r, 1)});
                std::cout << json{{"points", rows}}.dump() << '\n';
            } else {
                std::cout << "beta1,beta2\n";
                for (Eigen::Index r = 0; r < pts.rows(); ++r) {
                    std::cout << io::format_real(pts(r, 0)) << ',' << io::format_real(pts(r, 1)) << '\n';
                }
            }
        } else if (*sphCmd) {
            const auto rows = emit_sphericity_curve(sphMax);
            if (asJson) {
                json arr = json::array();
                for (const auto& [p, rho] : rows) arr.push_back({{"p", p}, {"rho", rho}});
                std::cout << arr.dump() << '\n';
            } else {
                std::cout << "p,rho\n";
                for (const auto& [p, rho] : rows) std::cout << p << ',' << io::format_real(rho) << '\n';
            }
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return e.kind() == ErrorKind::Numerical ? kExitNumerical : kExitValidation;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitValidation;
    }
    return 0;
}
