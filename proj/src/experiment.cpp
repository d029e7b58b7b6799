#include "torpsido/experiment.hpp"

#include "torpsido/errors.hpp"
#include "torpsido/index.hpp"
#include "torpsido/io.hpp"

#include <json.hpp>

#include <chrono>
#include <ctime>
#include <fstream>
#include <random>
#include <sstream>

namespace torpsido {

using nlohmann::json;

namespace {

// ---------------------------------------------------------------------------
// Config schema
// ---------------------------------------------------------------------------

const std::vector<std::string> kCommands = {
    "quantize",  "assemble",   "trace", "nuclearity", "decay",       "decompose-roundtrip",
    "spectrum",  "heat-trace", "index", "ellipticity", "hoermander-experiment",
};

struct ExperimentConfig {
    int torus_n = 1;
    int torus_m = 1;
    int window_radius = 2;
    int window_radius_xi = 2;
    int window_radius_eta = 2;
    int grid_samples = 0;    // 0: derived default
    int grid_samples_y = 0;  // 0: derived default
    int dim_in = 1;
    int dim_out = 1;
    std::string family = "identity";
    double family_order = 1.0;
    double family_decay = 1.0;
    bool family_x_dependent = false;
    std::optional<std::uint64_t> master_seed;
    std::optional<std::uint64_t> symbol_seed;
    std::optional<TailSpec> tail_override;
    std::optional<std::vector<Vector>> diagonal;
    std::string bisymbol_family = "bracket";
    double bisymbol_order = 1.0;
    double bisymbol_rho = 1.0;
    double bisymbol_delta = 0.0;
    double exp_s = 1.0;
    double exp_p = 2.0;
    double exp_p2 = 2.0;
    std::vector<double> t_grid = {0.01, 0.1, 1.0, 10.0};
    int dec_terms = 4;
    std::optional<std::uint64_t> dec_seed;
    std::string dec_side = "both";  // decay command: periodic | discrete
    double ellipticity_m = 1.0;
    double tol_rank = 1e-9;
    double tol_oracle = 1e-11;
    double tol_heat = 1e-8;
    std::string prefix;

    int resolved_grid(bool needs_fine) const {
        if (grid_samples > 0) return grid_samples;
        return needs_fine ? 4 * window_radius + 1 : 2 * window_radius + 1;
    }
    int resolved_grid_y() const {
        if (grid_samples_y > 0) return grid_samples_y;
        return 4 * window_radius_eta + 1;
    }
    bool family_is_random() const {
        return family == "random-decay" || family == "rectangular" || family == "tensor-kernel";
    }
    bool family_needs_grid() const { return family_x_dependent || family == "tensor-kernel"; }
    std::optional<std::uint64_t> resolved_symbol_seed() const {
        return symbol_seed ? symbol_seed : master_seed;
    }
    std::optional<std::uint64_t> resolved_dec_seed() const {
        if (dec_seed) return dec_seed;
        if (master_seed) return *master_seed + 1;
        return std::nullopt;
    }
};

void check_known_keys(const json& node, const std::vector<std::string>& known,
                      const std::string& where, std::vector<std::string>& diagnostics) {
    if (!node.is_object()) {
        diagnostics.push_back(where + ": expected a JSON object");
        return;
    }
    for (const auto& item : node.items()) {
        if (std::find(known.begin(), known.end(), item.key()) == known.end()) {
            diagnostics.push_back(where + ": unknown key '" + item.key() + "'");
        }
    }
}

template <typename T>
void read_number(const json& node, const char* key, T& out, std::vector<std::string>& diagnostics,
                 const std::string& where) {
    if (!node.contains(key)) return;
    if (!node[key].is_number()) {
        diagnostics.push_back(where + "." + key + ": expected a number");
        return;
    }
    out = node[key].get<T>();
}

ExperimentConfig parse_config(const json& root, std::vector<std::string>& diagnostics) {
    ExperimentConfig cfg;
    check_known_keys(root,
                     {"torus", "window", "grid", "fiber", "symbol", "bisymbol", "exponents",
                      "t_grid", "decomposition", "ellipticity", "tolerances", "output", "seed"},
                     "config", diagnostics);
    if (!root.is_object()) return cfg;

    if (root.contains("seed")) {
        if (root["seed"].is_number_unsigned()) {
            cfg.master_seed = root["seed"].get<std::uint64_t>();
        } else {
            diagnostics.push_back("config.seed: expected an unsigned integer");
        }
    }
    if (root.contains("torus")) {
        check_known_keys(root["torus"], {"n", "m"}, "torus", diagnostics);
        read_number(root["torus"], "n", cfg.torus_n, diagnostics, "torus");
        read_number(root["torus"], "m", cfg.torus_m, diagnostics, "torus");
    }
    if (root.contains("window")) {
        check_known_keys(root["window"], {"N", "N_xi", "N_eta"}, "window", diagnostics);
        read_number(root["window"], "N", cfg.window_radius, diagnostics, "window");
        cfg.window_radius_xi = cfg.window_radius;
        cfg.window_radius_eta = cfg.window_radius;
        read_number(root["window"], "N_xi", cfg.window_radius_xi, diagnostics, "window");
        read_number(root["window"], "N_eta", cfg.window_radius_eta, diagnostics, "window");
    }
    if (root.contains("grid")) {
        check_known_keys(root["grid"], {"M", "M_y"}, "grid", diagnostics);
        read_number(root["grid"], "M", cfg.grid_samples, diagnostics, "grid");
        read_number(root["grid"], "M_y", cfg.grid_samples_y, diagnostics, "grid");
    }
    if (root.contains("fiber")) {
        check_known_keys(root["fiber"], {"d_in", "d_out"}, "fiber", diagnostics);
        read_number(root["fiber"], "d_in", cfg.dim_in, diagnostics, "fiber");
        cfg.dim_out = cfg.dim_in;
        read_number(root["fiber"], "d_out", cfg.dim_out, diagnostics, "fiber");
    }
    if (root.contains("symbol")) {
        const json& sym = root["symbol"];
        check_known_keys(sym, {"family", "order", "decay", "x_dependent", "seed", "tail",
                               "eigenvalues"},
                         "symbol", diagnostics);
        if (sym.contains("family")) cfg.family = sym["family"].get<std::string>();
        read_number(sym, "order", cfg.family_order, diagnostics, "symbol");
        read_number(sym, "decay", cfg.family_decay, diagnostics, "symbol");
        if (sym.contains("x_dependent")) {
            if (sym["x_dependent"].is_boolean()) {
                cfg.family_x_dependent = sym["x_dependent"].get<bool>();
            } else {
                diagnostics.push_back("symbol.x_dependent: expected a boolean");
            }
        }
        if (sym.contains("seed")) {
            if (sym["seed"].is_number_unsigned()) {
                cfg.symbol_seed = sym["seed"].get<std::uint64_t>();
            } else {
                diagnostics.push_back("symbol.seed: expected an unsigned integer");
            }
        }
        if (sym.contains("tail")) {
            try {
                cfg.tail_override = tail_from_string(sym["tail"].get<std::string>());
            } catch (const ValidationError& err) {
                diagnostics.push_back(err.what());
            }
        }
        if (sym.contains("eigenvalues")) {
            if (!sym["eigenvalues"].is_array()) {
                diagnostics.push_back("symbol.eigenvalues: expected an array of arrays");
            } else {
                std::vector<Vector> diag;
                for (const auto& row : sym["eigenvalues"]) {
                    Vector v(static_cast<Index>(row.size()));
                    Index i = 0;
                    for (const auto& entry : row) {
                        if (entry.is_number()) {
                            v(i++) = Complex(entry.get<double>(), 0.0);
                        } else if (entry.is_array() && entry.size() == 2) {
                            v(i++) = Complex(entry[0].get<double>(), entry[1].get<double>());
                        } else {
                            diagnostics.push_back(
                                "symbol.eigenvalues: entries must be numbers or [re, im]");
                        }
                    }
                    diag.push_back(std::move(v));
                }
                cfg.diagonal = std::move(diag);
            }
        }
    }
    if (root.contains("bisymbol")) {
        const json& bis = root["bisymbol"];
        check_known_keys(bis, {"family", "order", "rho", "delta"}, "bisymbol", diagnostics);
        if (bis.contains("family")) cfg.bisymbol_family = bis["family"].get<std::string>();
        read_number(bis, "order", cfg.bisymbol_order, diagnostics, "bisymbol");
        read_number(bis, "rho", cfg.bisymbol_rho, diagnostics, "bisymbol");
        read_number(bis, "delta", cfg.bisymbol_delta, diagnostics, "bisymbol");
    }
    if (root.contains("exponents")) {
        check_known_keys(root["exponents"], {"s", "p", "p2"}, "exponents", diagnostics);
        read_number(root["exponents"], "s", cfg.exp_s, diagnostics, "exponents");
        read_number(root["exponents"], "p", cfg.exp_p, diagnostics, "exponents");
        read_number(root["exponents"], "p2", cfg.exp_p2, diagnostics, "exponents");
    }
    if (root.contains("t_grid")) {
        if (!root["t_grid"].is_array() || root["t_grid"].empty()) {
            diagnostics.push_back("t_grid: expected a nonempty array of numbers");
        } else {
            cfg.t_grid.clear();
            for (const auto& v : root["t_grid"]) {
                if (!v.is_number()) {
                    diagnostics.push_back("t_grid: entries must be numbers");
                    break;
                }
                cfg.t_grid.push_back(v.get<double>());
            }
        }
    }
    if (root.contains("decomposition")) {
        const json& dec = root["decomposition"];
        check_known_keys(dec, {"terms", "seed", "side"}, "decomposition", diagnostics);
        read_number(dec, "terms", cfg.dec_terms, diagnostics, "decomposition");
        if (dec.contains("seed")) {
            if (dec["seed"].is_number_unsigned()) {
                cfg.dec_seed = dec["seed"].get<std::uint64_t>();
            } else {
                diagnostics.push_back("decomposition.seed: expected an unsigned integer");
            }
        }
        if (dec.contains("side")) cfg.dec_side = dec["side"].get<std::string>();
    }
    if (root.contains("ellipticity")) {
        check_known_keys(root["ellipticity"], {"m"}, "ellipticity", diagnostics);
        read_number(root["ellipticity"], "m", cfg.ellipticity_m, diagnostics, "ellipticity");
    }
    if (root.contains("tolerances")) {
        check_known_keys(root["tolerances"], {"rank", "oracle", "heat"}, "tolerances", diagnostics);
        read_number(root["tolerances"], "rank", cfg.tol_rank, diagnostics, "tolerances");
        read_number(root["tolerances"], "oracle", cfg.tol_oracle, diagnostics, "tolerances");
        read_number(root["tolerances"], "heat", cfg.tol_heat, diagnostics, "tolerances");
    }
    if (root.contains("output")) {
        check_known_keys(root["output"], {"prefix"}, "output", diagnostics);
        if (root["output"].contains("prefix")) {
            cfg.prefix = root["output"]["prefix"].get<std::string>();
        }
    }
    return cfg;
}

bool command_is_multiplier_only(const std::string& command) {
    return command == "spectrum" || command == "heat-trace" || command == "index" ||
           command == "ellipticity";
}

void audit_config(const std::string& command, const ExperimentConfig& cfg,
                  std::vector<std::string>& diagnostics) {
    // empty command: generic audit only (the validate path without a target)
    if (!command.empty() &&
        std::find(kCommands.begin(), kCommands.end(), command) == kCommands.end()) {
        diagnostics.push_back("unknown command: " + command);
        return;
    }
    if (cfg.torus_n < 1) diagnostics.push_back("torus.n must be >= 1");
    if (cfg.window_radius < 0) diagnostics.push_back("window.N must be >= 0");
    if (cfg.dim_in < 1 || cfg.dim_out < 1) diagnostics.push_back("fiber dimensions must be >= 1");

    const bool fine = cfg.family_needs_grid();
    if (cfg.grid_samples > 0) {
        if (cfg.grid_samples < 2 * cfg.window_radius + 1) {
            std::ostringstream msg;
            msg << "grid.M = " << cfg.grid_samples << " violates M >= 2N+1 = "
                << 2 * cfg.window_radius + 1;
            diagnostics.push_back(msg.str());
        }
        if (fine && cfg.grid_samples < 4 * cfg.window_radius + 1) {
            std::ostringstream msg;
            msg << "grid.M = " << cfg.grid_samples
                << " violates M >= 4N+1 required by x-dependent quantization";
            diagnostics.push_back(msg.str());
        }
    }

    if (cfg.family_is_random() && !cfg.resolved_symbol_seed()) {
        diagnostics.push_back("symbol family '" + cfg.family + "' requires a seed");
    }
    if (cfg.family == "diagonal" && !cfg.diagonal) {
        diagnostics.push_back("diagonal family requires symbol.eigenvalues");
    }
    if (cfg.family == "tensor-kernel" && !cfg.resolved_dec_seed()) {
        diagnostics.push_back("tensor-kernel family requires a decomposition seed");
    }

    if (!(cfg.exp_s > 0.0) || cfg.exp_s > 1.0) diagnostics.push_back("exponents.s must lie in (0, 1]");
    if (!(cfg.exp_p > 1.0)) diagnostics.push_back("exponents.p must lie in (1, inf)");
    if (cfg.exp_p2 < 1.0) diagnostics.push_back("exponents.p2 must lie in [1, inf)");
    for (double t : cfg.t_grid) {
        if (!(t > 0.0)) diagnostics.push_back("t_grid entries must be positive");
    }
    if (cfg.dec_terms < 0) diagnostics.push_back("decomposition.terms must be >= 0");
    if (cfg.tol_rank <= 0 || cfg.tol_oracle <= 0 || cfg.tol_heat <= 0) {
        diagnostics.push_back("tolerances must be positive");
    }

    if (command_is_multiplier_only(command)) {
        if (cfg.family_x_dependent || cfg.family == "tensor-kernel") {
            diagnostics.push_back("command '" + command + "' needs an x-independent multiplier");
        }
    }
    if (command == "index") {
        TailSpec tail = TailSpec::undeclared;
        if (cfg.family == "identity" || cfg.family == "bessel") {
            tail = TailSpec::invertible_identity_like;
        } else if (cfg.family == "random-decay" || cfg.family == "rectangular") {
            tail = TailSpec::zero;
        }
        if (cfg.tail_override) tail = *cfg.tail_override;
        if (tail == TailSpec::undeclared) {
            diagnostics.push_back(
                "index refused: tail_spec is undeclared, the index sum is not well-defined "
                "under truncation");
        }
    }
    if (command == "ellipticity" || command == "spectrum" || command == "trace") {
        if (cfg.dim_in != cfg.dim_out) {
            diagnostics.push_back("command '" + command + "' needs square fibers");
        }
    }
    if (command == "quantize" || command == "decompose-roundtrip") {
        if (!cfg.resolved_symbol_seed() && !cfg.resolved_dec_seed()) {
            diagnostics.push_back("command '" + command + "' draws random data and needs a seed");
        }
    }
    if (command == "hoermander-experiment") {
        if (cfg.torus_m < 1) diagnostics.push_back("torus.m must be >= 1");
        if (cfg.window_radius_xi < 0 || cfg.window_radius_eta < 0) {
            diagnostics.push_back("window.N_xi and window.N_eta must be >= 0");
        }
        const int my = cfg.grid_samples_y > 0 ? cfg.grid_samples_y : cfg.resolved_grid_y();
        if (my < 2 * cfg.window_radius_eta + 1) {
            std::ostringstream msg;
            msg << "grid.M_y = " << my << " violates M_y >= 2*N_eta+1 = "
                << 2 * cfg.window_radius_eta + 1;
            diagnostics.push_back(msg.str());
        }
        if (my % 2 == 0) diagnostics.push_back("grid.M_y must be odd for spectral derivatives");
        if (!(cfg.bisymbol_order > 0.0)) {
            diagnostics.push_back("bisymbol.order must be positive for the index experiment");
        }
    }
}

// ---------------------------------------------------------------------------
// Object construction
// ---------------------------------------------------------------------------

SymbolTable build_symbol(const ExperimentConfig& cfg) {
    const FrequencyWindow window(cfg.torus_n, cfg.window_radius);
    if (cfg.family == "tensor-kernel") {
        const TorusGrid grid(cfg.torus_n, cfg.resolved_grid(true));
        const auto dec = random_periodic_decomposition(grid, window, cfg.dim_in, cfg.dec_terms,
                                                       cfg.exp_p, cfg.exp_s,
                                                       *cfg.resolved_dec_seed());
        return decomposition_to_symbol(dec, window);
    }
    SymbolFamilyParams params;
    params.dim_in = cfg.dim_in;
    params.dim_out = cfg.dim_out;
    params.order = cfg.family_order;
    params.decay = cfg.family_decay;
    params.x_dependent = cfg.family_x_dependent;
    params.seed = cfg.resolved_symbol_seed();
    params.diagonal = cfg.diagonal;
    params.tail = cfg.tail_override;
    std::optional<TorusGrid> grid;
    if (cfg.family_needs_grid()) grid = TorusGrid(cfg.torus_n, cfg.resolved_grid(true));
    return make_family(cfg.family, window, params, grid);
}

json complex_json(const Complex& z) { return json::array({z.real(), z.imag()}); }

json frequency_json(const FrequencyWindow& window, Index k) {
    json out = json::array();
    for (int c : window.frequency(k)) out.push_back(c);
    return out;
}

json config_json(const ExperimentConfig& cfg, const std::string& command) {
    json out;
    out["torus"] = {{"n", cfg.torus_n}, {"m", cfg.torus_m}};
    out["window"] = {{"N", cfg.window_radius},
                     {"N_xi", cfg.window_radius_xi},
                     {"N_eta", cfg.window_radius_eta}};
    out["grid"] = {{"M", cfg.resolved_grid(cfg.family_needs_grid())},
                   {"M_y", cfg.resolved_grid_y()}};
    out["fiber"] = {{"d_in", cfg.dim_in}, {"d_out", cfg.dim_out}};
    json sym = {{"family", cfg.family},
                {"order", cfg.family_order},
                {"decay", cfg.family_decay},
                {"x_dependent", cfg.family_x_dependent}};
    if (cfg.resolved_symbol_seed()) sym["seed"] = *cfg.resolved_symbol_seed();
    if (cfg.tail_override) sym["tail"] = to_string(*cfg.tail_override);
    out["symbol"] = sym;
    out["bisymbol"] = {{"family", cfg.bisymbol_family},
                       {"order", cfg.bisymbol_order},
                       {"rho", cfg.bisymbol_rho},
                       {"delta", cfg.bisymbol_delta}};
    out["exponents"] = {{"s", cfg.exp_s}, {"p", cfg.exp_p}, {"p2", cfg.exp_p2}};
    out["t_grid"] = cfg.t_grid;
    json dec = {{"terms", cfg.dec_terms}, {"side", cfg.dec_side}};
    if (cfg.resolved_dec_seed()) dec["seed"] = *cfg.resolved_dec_seed();
    out["decomposition"] = dec;
    out["ellipticity"] = {{"m", cfg.ellipticity_m}};
    out["tolerances"] = {{"rank", cfg.tol_rank}, {"oracle", cfg.tol_oracle}, {"heat", cfg.tol_heat}};
    out["output"] = {{"prefix", cfg.prefix.empty() ? command : cfg.prefix}};
    return out;
}

json index_report_json(const IndexReport& report, const FrequencyWindow& window) {
    json rows = json::array();
    for (const auto& row : report.per_frequency) {
        rows.push_back({{"eta", frequency_json(window, row.freq)},
                        {"ker_dim", row.kernel_dim},
                        {"coker_dim", row.cokernel_dim},
                        {"index", row.index},
                        {"ambiguous", row.ambiguous}});
    }
    return json{{"per_frequency", rows},
                {"total", report.total},
                {"assembled_index", report.assembled_index},
                {"ms_t_grid", report.ms_t_grid},
                {"ms_values", report.ms_values},
                {"ms_spread", report.ms_spread},
                {"tol", report.rank_tol},
                {"tail_note", report.tail_note}};
}

json shells_json(const std::vector<ShellRow>& shells) {
    json out = json::array();
    for (const auto& row : shells) {
        out.push_back({{"shell", row.shell}, {"value", row.value}, {"cumulative", row.cumulative}});
    }
    return out;
}

VectorField random_config_field(const ExperimentConfig& cfg, const TorusGrid& grid,
                                const FrequencyWindow& window, int dim) {
    std::mt19937_64 rng(cfg.resolved_symbol_seed().value_or(
                            cfg.resolved_dec_seed().value_or(0)) ^
                        0x9e3779b97f4a7c15ULL);
    std::normal_distribution<double> normal(0.0, 1.0);
    Matrix coeffs(dim, window.size());
    for (Index k = 0; k < window.size(); ++k) {
        for (int i = 0; i < dim; ++i) coeffs(i, k) = Complex(normal(rng), normal(rng));
    }
    return inverse_vft(FourierCoefficients(window, std::move(coeffs)), grid);
}

// ---------------------------------------------------------------------------
// Command bodies
// ---------------------------------------------------------------------------

json run_quantize(const ExperimentConfig& cfg, const std::filesystem::path& out_dir,
                  const std::string& prefix, std::vector<std::filesystem::path>& files) {
    const SymbolTable sigma = build_symbol(cfg);
    const TorusGrid field_grid = sigma.is_multiplier()
                                     ? TorusGrid(cfg.torus_n, cfg.resolved_grid(false))
                                     : sigma.grid();
    const VectorField input = random_config_field(cfg, field_grid, sigma.window(), sigma.dim_in());
    const VectorField output = apply_periodic(sigma, input);

    const AssembledOperator op = assemble_matrix(sigma);
    const FourierCoefficients oracle = apply_assembled(op, forward_vft(input, sigma.window()));
    const FourierCoefficients direct = forward_vft(output, sigma.window());
    const double scale = std::max(1e-30, oracle.values().norm());
    const double residual = (oracle.values() - direct.values()).norm() / scale;

    const auto in_path = out_dir / (prefix + "-input.tpsd");
    const auto out_path = out_dir / (prefix + "-output.tpsd");
    const auto csv_path = out_dir / (prefix + "-output.csv");
    write_field(in_path, input);
    write_field(out_path, output);
    write_field_csv(csv_path, output);
    files.insert(files.end(), {in_path, out_path, csv_path});

    if (residual > cfg.tol_oracle) {
        std::ostringstream msg;
        msg << "quantize: dense-oracle residual " << residual << " exceeds tolerance "
            << cfg.tol_oracle;
        throw ContractError(msg.str());
    }
    return json{{"input_l2_norm", lp_norm(input, 2.0)},
                {"output_l2_norm", lp_norm(output, 2.0)},
                {"oracle_residual", residual}};
}

json run_assemble(const ExperimentConfig& cfg, const std::filesystem::path& out_dir,
                  const std::string& prefix, std::vector<std::filesystem::path>& files) {
    const SymbolTable sigma = build_symbol(cfg);
    const AssembledOperator op = assemble_matrix(sigma);

    bool block_diagonal = true;
    for (Index r = 0; r < op.window.size() && block_diagonal; ++r) {
        for (Index c = 0; c < op.window.size(); ++c) {
            if (r == c) continue;
            if (op.matrix.block(r * op.dim_out, c * op.dim_in, op.dim_out, op.dim_in)
                    .cwiseAbs()
                    .maxCoeff() != 0.0) {
                block_diagonal = false;
                break;
            }
        }
    }

    const auto bin_path = out_dir / (prefix + "-operator.tpsd");
    const auto mm_path = out_dir / (prefix + "-operator.mtx");
    write_assembled(bin_path, op);
    write_matrix_market(mm_path, op.matrix, sigma.is_multiplier());
    files.insert(files.end(), {bin_path, mm_path});

    return json{{"rows", op.matrix.rows()},
                {"cols", op.matrix.cols()},
                {"frobenius_norm", op.matrix.norm()},
                {"block_diagonal", block_diagonal}};
}

json run_trace(const ExperimentConfig& cfg) {
    const SymbolTable sigma = build_symbol(cfg);
    if (sigma.dim_in() != sigma.dim_out()) {
        throw ValidationError("trace: square fibers required");
    }
    const TraceReport report = nuclear_trace_pdo(sigma);
    const TraceReport grothendieck = grothendieck_check(assemble_matrix(sigma).matrix);

    json rows = json::array();
    for (Index k = 0; k < sigma.window().size(); ++k) {
        rows.push_back({{"xi", frequency_json(sigma.window(), k)},
                        {"trace", complex_json(report.per_frequency[static_cast<std::size_t>(k)])}});
    }
    return json{{"nuclear_trace", complex_json(report.nuclear)},
                {"spectral_trace", complex_json(report.spectral)},
                {"discrepancy", report.discrepancy},
                {"grothendieck", json{{"matrix_trace", complex_json(grothendieck.nuclear)},
                                      {"eigenvalue_sum", complex_json(grothendieck.spectral)},
                                      {"discrepancy", grothendieck.discrepancy}}},
                {"per_frequency", rows}};
}

json run_nuclearity(const ExperimentConfig& cfg) {
    const SymbolTable sigma = build_symbol(cfg);
    const SummabilityReport report = summability_check(sigma, cfg.exp_s, cfg.exp_p2);
    return json{{"shells", shells_json(report.shells)},
                {"ratios", report.ratios},
                {"summable_trend", report.summable_trend},
                {"s", report.s},
                {"p2", report.p2}};
}

json run_decay(const ExperimentConfig& cfg) {
    const double p_conj = cfg.exp_p / (cfg.exp_p - 1.0);
    json out;
    if (cfg.dec_side == "periodic" || cfg.dec_side == "both") {
        const SymbolTable sigma = build_symbol(cfg);
        const DecayReport report = decay_norm(sigma, p_conj);
        out["periodic"] = json{{"norm", report.norm},
                               {"shells", shells_json(report.shells)},
                               {"ratios", report.ratios},
                               {"summable_trend", report.summable_trend},
                               {"p_conj", report.p_conj}};
    }
    if (cfg.dec_side == "discrete" || cfg.dec_side == "both") {
        const FrequencyWindow support(cfg.torus_n, cfg.window_radius);
        const auto dec = random_discrete_decomposition(
            support, cfg.dim_in, cfg.dec_terms, cfg.exp_p, cfg.exp_s,
            cfg.resolved_dec_seed().value_or(cfg.resolved_symbol_seed().value_or(1)));
        const DiscreteSymbol a = discrete_decomposition_to_symbol(dec);
        const DecayReport report = decay_norm(a, p_conj);
        out["discrete"] = json{{"norm", report.norm},
                               {"shells", shells_json(report.shells)},
                               {"ratios", report.ratios},
                               {"summable_trend", report.summable_trend},
                               {"p_conj", report.p_conj}};
    }
    return out;
}

json run_decompose_roundtrip(const ExperimentConfig& cfg) {
    const std::uint64_t seed = cfg.resolved_dec_seed().value_or(*cfg.resolved_symbol_seed());

    // periodic path
    const FrequencyWindow window(cfg.torus_n, cfg.window_radius);
    const TorusGrid grid(cfg.torus_n, cfg.resolved_grid(true));
    const auto dec = random_periodic_decomposition(grid, window, cfg.dim_in, cfg.dec_terms,
                                                   cfg.exp_p, cfg.exp_s, seed);
    const VectorField probe = random_config_field(cfg, grid, window, cfg.dim_in);
    const VectorField kernel_path = kernel_operator(dec, probe);
    const SymbolTable sigma = decomposition_to_symbol(dec, window);
    const VectorField symbol_path = apply_periodic(sigma, probe);
    const double scale_p = std::max(1e-30, kernel_path.samples().norm());
    const double periodic_residual =
        (kernel_path.samples() - symbol_path.samples()).norm() / scale_p;

    // discrete path
    const FrequencyWindow support(cfg.torus_n, cfg.window_radius);
    const auto ddec = random_discrete_decomposition(support, cfg.dim_in, cfg.dec_terms, cfg.exp_p,
                                                    cfg.exp_s, seed + 1);
    std::mt19937_64 rng(seed + 2);
    std::normal_distribution<double> normal(0.0, 1.0);
    Matrix probe_values(cfg.dim_in, support.size());
    for (Index x = 0; x < support.size(); ++x) {
        for (int i = 0; i < cfg.dim_in; ++i) probe_values(i, x) = Complex(normal(rng), normal(rng));
    }
    const LatticeField dprobe(support, std::move(probe_values));
    const LatticeField dkernel = kernel_operator(ddec, dprobe);
    const DiscreteSymbol a = discrete_decomposition_to_symbol(ddec);
    const LatticeField dsymbol = apply_discrete(a, dprobe);
    const double scale_d = std::max(1e-30, dkernel.values().norm());
    const double discrete_residual = (dkernel.values() - dsymbol.values()).norm() / scale_d;

    if (periodic_residual > cfg.tol_oracle || discrete_residual > cfg.tol_oracle) {
        std::ostringstream msg;
        msg << "decompose-roundtrip: kernel/symbol path residuals (" << periodic_residual << ", "
            << discrete_residual << ") exceed tolerance " << cfg.tol_oracle;
        throw ContractError(msg.str());
    }
    return json{{"terms", cfg.dec_terms},
                {"periodic_residual", periodic_residual},
                {"discrete_residual", discrete_residual},
                {"periodic_summability", dec.summability()},
                {"discrete_summability", ddec.summability()}};
}

json run_spectrum(const ExperimentConfig& cfg) {
    const SymbolTable sigma = build_symbol(cfg);
    const SpectrumReport report = multiplier_spectrum(sigma);
    double scale = 1.0;
    for (Index i = 0; i < report.assembled.size(); ++i) {
        scale = std::max(scale, std::abs(report.assembled(i)));
    }
    if (report.union_discrepancy > 1e-9 * scale) {
        std::ostringstream msg;
        msg << "spectrum: union of per-frequency spectra deviates from the assembled spectrum by "
            << report.union_discrepancy;
        throw ContractError(msg.str());
    }
    json eigs = json::array();
    for (Index i = 0; i < report.assembled.size(); ++i) {
        eigs.push_back(complex_json(report.assembled(i)));
    }
    json per_freq = json::array();
    for (Index k = 0; k < sigma.window().size(); ++k) {
        json local = json::array();
        const Vector& vals = report.per_frequency[static_cast<std::size_t>(k)];
        for (Index i = 0; i < vals.size(); ++i) local.push_back(complex_json(vals(i)));
        per_freq.push_back({{"xi", frequency_json(sigma.window(), k)}, {"eigenvalues", local}});
    }
    return json{{"union_discrepancy", report.union_discrepancy},
                {"eigenvalues", eigs},
                {"per_frequency", per_freq}};
}

json run_heat_trace(const ExperimentConfig& cfg) {
    const SymbolTable sigma = build_symbol(cfg);
    json rows = json::array();
    for (double t : cfg.t_grid) {
        const HeatTraceReport report = heat_trace_sum(sigma, t);
        const double scale_source = std::max(1e-30, std::abs(report.assembled_source));
        const double scale_target = std::max(1e-30, std::abs(report.assembled_target));
        const double rel_source = report.discrepancy_source / scale_source;
        const double rel_target = report.discrepancy_target / scale_target;
        if (rel_source > cfg.tol_heat || rel_target > cfg.tol_heat) {
            std::ostringstream msg;
            msg << "heat-trace: per-frequency sum deviates from the assembled trace at t = " << t
                << " (relative " << std::max(rel_source, rel_target) << ")";
            throw ContractError(msg.str());
        }
        rows.push_back({{"t", t},
                        {"assembled_source", complex_json(report.assembled_source)},
                        {"summed_source", complex_json(report.summed_source)},
                        {"assembled_target", complex_json(report.assembled_target)},
                        {"summed_target", complex_json(report.summed_target)},
                        {"rel_source", rel_source},
                        {"rel_target", rel_target}});
    }
    return json{{"rows", rows}};
}

json run_index(const ExperimentConfig& cfg) {
    const SymbolTable sigma = build_symbol(cfg);
    const IndexReport report = multiplier_index(sigma, cfg.tol_rank, cfg.t_grid);
    if (report.total != report.assembled_index) {
        std::ostringstream msg;
        msg << "index: window sum " << report.total << " disagrees with the assembled index "
            << report.assembled_index;
        throw ContractError(msg.str());
    }
    for (double v : report.ms_values) {
        if (std::abs(v - static_cast<double>(report.total)) > cfg.tol_heat) {
            std::ostringstream msg;
            msg << "index: McKean-Singer value " << v << " deviates from the integer index "
                << report.total;
            throw ContractError(msg.str());
        }
    }
    return index_report_json(report, sigma.window());
}

json run_ellipticity(const ExperimentConfig& cfg) {
    const SymbolTable sigma = build_symbol(cfg);
    const EllipticityReport report =
        mb_ellipticity_report(sigma, cfg.ellipticity_m, cfg.t_grid.size() >= 3 ? cfg.t_grid
                                                                               : std::vector<double>{});
    json rates = json::array();
    for (const auto& rate : report.rates) {
        rates.push_back({{"xi", frequency_json(sigma.window(), rate.freq)},
                         {"alpha", rate.alpha},
                         {"fiber_norm", rate.fiber_norm},
                         {"rate_source", rate.rate_source},
                         {"rate_target", rate.rate_target}});
    }
    return json{{"admissible_constant", report.admissible_constant},
                {"admissible_constant_bracket", report.admissible_constant_bracket},
                {"positive", report.positive},
                {"m", report.exponent_m},
                {"t_grid", report.t_grid},
                {"rates", rates}};
}

json run_hoermander(const ExperimentConfig& cfg) {
    const TorusGrid y_grid(cfg.torus_m, cfg.resolved_grid_y());
    const FrequencyWindow xi_window(cfg.torus_n, cfg.window_radius_xi);
    const FrequencyWindow eta_window(cfg.torus_m, cfg.window_radius_eta);
    const ScalarBisymbol b =
        make_bisymbol_family(cfg.bisymbol_family, y_grid, xi_window, eta_window,
                             cfg.bisymbol_order, cfg.bisymbol_rho, cfg.bisymbol_delta);
    const HoermanderIndexExperiment experiment =
        periodic_index_experiment(b, cfg.tol_rank, cfg.t_grid);
    if (!experiment.paths_agree) {
        throw ContractError("hoermander-experiment: the three index paths disagree");
    }
    json bounds = json::array();
    for (const auto& entry : experiment.bounds.entries) {
        bounds.push_back({{"dy", entry.dy},
                          {"dxi", entry.dxi},
                          {"deta", entry.deta},
                          {"constant", entry.constant}});
    }
    return json{{"ellipticity_constant", experiment.bounds.ellipticity_constant},
                {"bounds", bounds},
                {"index", index_report_json(experiment.index, xi_window)},
                {"paths_agree", experiment.paths_agree},
                {"total_index", experiment.index.total}};
}

// ---------------------------------------------------------------------------
// CSV tables from reports
// ---------------------------------------------------------------------------

void write_csv_rows(const std::filesystem::path& path, const std::string& header,
                    const std::vector<std::string>& rows) {
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot open for writing: " + path.string());
    out << header << "\n";
    for (const auto& row : rows) out << row << "\n";
}

std::string join_frequency(const json& freq) {
    std::ostringstream out;
    for (std::size_t i = 0; i < freq.size(); ++i) {
        if (i) out << " ";
        out << freq[i].get<int>();
    }
    return out.str();
}

std::vector<std::filesystem::path> emit_tables_impl(const json& report,
                                                    const std::filesystem::path& out_dir) {
    std::vector<std::filesystem::path> files;
    const std::string prefix = report.at("config").at("output").at("prefix").get<std::string>();
    const json& results = report.at("results");
    std::ostringstream row;
    row.precision(17);

    auto flush_row = [&row]() {
        std::string text = row.str();
        row.str("");
        return text;
    };

    if (results.contains("per_frequency") && report.at("command") == "trace") {
        std::vector<std::string> rows;
        for (const auto& entry : results["per_frequency"]) {
            row << '"' << join_frequency(entry["xi"]) << '"' << ","
                << entry["trace"][0].get<double>() << "," << entry["trace"][1].get<double>();
            rows.push_back(flush_row());
        }
        const auto path = out_dir / (prefix + "-frequencies.csv");
        write_csv_rows(path, "xi,trace_re,trace_im", rows);
        files.push_back(path);
    }
    auto write_shells = [&](const json& shells, const std::string& name) {
        std::vector<std::string> rows;
        for (const auto& entry : shells) {
            row << entry["shell"].get<int>() << "," << entry["value"].get<double>() << ","
                << entry["cumulative"].get<double>();
            rows.push_back(flush_row());
        }
        const auto path = out_dir / (prefix + "-" + name + ".csv");
        write_csv_rows(path, "shell,value,cumulative", rows);
        files.push_back(path);
    };
    if (results.contains("shells")) write_shells(results["shells"], "shells");
    for (const std::string side : {"periodic", "discrete"}) {
        if (results.contains(side) && results[side].contains("shells")) {
            write_shells(results[side]["shells"], side + "-shells");
        }
    }
    if (report.at("command") == "ellipticity" && results.contains("rates")) {
        std::vector<std::string> rows;
        for (const auto& entry : results["rates"]) {
            row << '"' << join_frequency(entry["xi"]) << '"' << "," << entry["alpha"].get<int>()
                << "," << entry["fiber_norm"].get<double>() << ","
                << entry["rate_source"].get<double>() << "," << entry["rate_target"].get<double>();
            rows.push_back(flush_row());
        }
        const auto path = out_dir / (prefix + "-rates.csv");
        write_csv_rows(path, "xi,alpha,fiber_norm,rate_source,rate_target", rows);
        files.push_back(path);
    }
    const json* index_block = nullptr;
    if (report.at("command") == "index") index_block = &results;
    if (report.at("command") == "hoermander-experiment" && results.contains("index")) {
        index_block = &results["index"];
    }
    if (index_block && index_block->contains("per_frequency")) {
        std::vector<std::string> rows;
        for (const auto& entry : (*index_block)["per_frequency"]) {
            row << '"' << join_frequency(entry["eta"]) << '"' << ","
                << entry["ker_dim"].get<long>() << "," << entry["coker_dim"].get<long>() << ","
                << entry["index"].get<long>();
            rows.push_back(flush_row());
        }
        const auto path = out_dir / (prefix + "-index.csv");
        write_csv_rows(path, "eta,ker,coker,index", rows);
        files.push_back(path);
    }
    if (report.at("command") == "heat-trace" && results.contains("rows")) {
        std::vector<std::string> rows;
        for (const auto& entry : results["rows"]) {
            row << entry["t"].get<double>() << "," << entry["assembled_source"][0].get<double>()
                << "," << entry["summed_source"][0].get<double>() << ","
                << entry["assembled_target"][0].get<double>() << ","
                << entry["summed_target"][0].get<double>() << ","
                << entry["rel_source"].get<double>() << "," << entry["rel_target"].get<double>();
            rows.push_back(flush_row());
        }
        const auto path = out_dir / (prefix + "-heat.csv");
        write_csv_rows(path, "t,assembled_source,summed_source,assembled_target,summed_target,rel_source,rel_target",
                       rows);
        files.push_back(path);
    }
    if (report.at("command") == "spectrum" && results.contains("eigenvalues")) {
        std::vector<std::string> rows;
        for (const auto& entry : results["eigenvalues"]) {
            row << entry[0].get<double>() << "," << entry[1].get<double>();
            rows.push_back(flush_row());
        }
        const auto path = out_dir / (prefix + "-spectrum.csv");
        write_csv_rows(path, "re,im", rows);
        files.push_back(path);
    }
    return files;
}

std::string timestamp_now() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    char buffer[32];
    std::strftime(buffer, sizeof(buffer), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
    return buffer;
}

}  // namespace

const std::vector<std::string>& experiment_commands() { return kCommands; }

std::vector<std::string> validate_experiment(const std::string& command,
                                             const std::string& config_text) {
    std::vector<std::string> diagnostics;
    json root;
    try {
        root = json::parse(config_text);
    } catch (const json::parse_error& err) {
        diagnostics.push_back(std::string("config does not parse: ") + err.what());
        return diagnostics;
    }
    try {
        const ExperimentConfig cfg = parse_config(root, diagnostics);
        audit_config(command, cfg, diagnostics);
    } catch (const json::exception& err) {
        diagnostics.push_back(std::string("config field has the wrong type: ") + err.what());
    }
    return diagnostics;
}

RunResult run_experiment(const std::string& command, const std::string& config_text,
                         const std::filesystem::path& out_dir,
                         std::optional<std::uint64_t> seed_override, int threads) {
    if (threads < 1) throw ValidationError("threads must be >= 1");

    std::vector<std::string> diagnostics;
    json root;
    try {
        root = json::parse(config_text);
    } catch (const json::parse_error& err) {
        throw ValidationError(std::string("config does not parse: ") + err.what());
    }
    if (seed_override) {
        if (!root.is_object()) root = json::object();
        root["seed"] = *seed_override;
        // the flag supersedes every config-level seed
        if (root.contains("symbol") && root["symbol"].is_object()) root["symbol"].erase("seed");
        if (root.contains("decomposition") && root["decomposition"].is_object()) {
            root["decomposition"].erase("seed");
        }
    }
    ExperimentConfig cfg;
    try {
        cfg = parse_config(root, diagnostics);
        audit_config(command, cfg, diagnostics);
    } catch (const json::exception& err) {
        diagnostics.push_back(std::string("config field has the wrong type: ") + err.what());
    }
    if (!diagnostics.empty()) {
        std::ostringstream msg;
        msg << "config validation failed:";
        for (const auto& d : diagnostics) msg << "\n  - " << d;
        throw ValidationError(msg.str());
    }
    if (cfg.prefix.empty()) cfg.prefix = command;

    std::filesystem::create_directories(out_dir);
    std::vector<std::filesystem::path> files;

    json results;
    if (command == "quantize") {
        results = run_quantize(cfg, out_dir, cfg.prefix, files);
    } else if (command == "assemble") {
        results = run_assemble(cfg, out_dir, cfg.prefix, files);
    } else if (command == "trace") {
        results = run_trace(cfg);
    } else if (command == "nuclearity") {
        results = run_nuclearity(cfg);
    } else if (command == "decay") {
        results = run_decay(cfg);
    } else if (command == "decompose-roundtrip") {
        results = run_decompose_roundtrip(cfg);
    } else if (command == "spectrum") {
        results = run_spectrum(cfg);
    } else if (command == "heat-trace") {
        results = run_heat_trace(cfg);
    } else if (command == "index") {
        results = run_index(cfg);
    } else if (command == "ellipticity") {
        results = run_ellipticity(cfg);
    } else if (command == "hoermander-experiment") {
        results = run_hoermander(cfg);
    } else {
        throw ValidationError("unknown command: " + command);
    }

    json report;
    report["command"] = command;
    report["config"] = config_json(cfg, command);
    report["threads"] = threads;
    report["timestamp"] = timestamp_now();
    report["results"] = results;

    const auto report_path = out_dir / (cfg.prefix + "-report.json");
    {
        std::ofstream out(report_path);
        if (!out) throw ValidationError("cannot open for writing: " + report_path.string());
        out << report.dump(2) << "\n";
    }

    RunResult result;
    result.report_text = report.dump(2);
    result.files.push_back(report_path);
    for (auto& f : files) result.files.push_back(std::move(f));
    for (auto& f : emit_tables_impl(report, out_dir)) result.files.push_back(std::move(f));
    return result;
}

std::vector<std::filesystem::path> emit_tables(const std::string& report_text,
                                               const std::filesystem::path& out_dir) {
    json report;
    try {
        report = json::parse(report_text);
    } catch (const json::parse_error& err) {
        throw ValidationError(std::string("report does not parse: ") + err.what());
    }
    std::filesystem::create_directories(out_dir);
    return emit_tables_impl(report, out_dir);
}

}  // namespace torpsido
