#include "tubal/config.hpp"

#include <fstream>
#include <sstream>

namespace tubal {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

template <typename T, typename Parse>
std::vector<T> parse_list(const std::string& v, Parse parse) {
    std::vector<T> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(parse(item));
    }
    return out;
}

long to_long(const std::string& v) { return std::stol(v); }
int to_int(const std::string& v) { return std::stoi(v); }
double to_double(const std::string& v) { return std::stod(v); }

bool to_bool(const std::string& v) {
    if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
    if (v == "0" || v == "false" || v == "no" || v == "off") return false;
    throw InvalidArgument("bad boolean value: " + v);
}

}  // namespace

ExperimentConfig ExperimentConfig::load(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw IoError("cannot open config: " + path);
    ExperimentConfig cfg;
    std::string line;
    int lineno = 0;
    while (std::getline(f, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            std::ostringstream os;
            os << path << ":" << lineno << ": expected key=value";
            throw InvalidArgument(os.str());
        }
        cfg.set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    return cfg;
}

void ExperimentConfig::set(const std::string& key, const std::string& value) {
    try {
        if (key == "command") command = value;
        else if (key == "n") n = to_int(value);
        else if (key == "n3") n3 = to_int(value);
        else if (key == "r_star") r_star = to_int(value);
        else if (key == "r") r = to_int(value);
        else if (key == "m") m = to_long(value);
        else if (key == "m_rule") m_rule = value;
        else if (key == "v") v = to_double(value);
        else if (key == "eta") eta = to_double(value);
        else if (key == "eta_mode") eta_mode = value;
        else if (key == "rho") rho = to_double(value);
        else if (key == "max_iters") max_iters = to_int(value);
        else if (key == "stop") stop = value;
        else if (key == "stop_tol") stop_tol = to_double(value);
        else if (key == "trace_every") trace_every = to_int(value);
        else if (key == "seed") seed = std::stoull(value);
        else if (key == "seeds") seeds = to_int(value);
        else if (key == "out") out_dir = value;
        else if (key == "measurement") measurement = value;
        else if (key == "threads") threads = to_int(value);
        else if (key == "save_tensors") save_tensors = to_bool(value);
        else if (key == "error_terms") error_terms = to_bool(value);
        else if (key == "grid_m") grid_m = to_int(value);
        else if (key == "grid_r") grid_r = to_int(value);
        else if (key == "m_list") m_list = parse_list<long>(value, to_long);
        else if (key == "r_star_list") r_star_list = parse_list<int>(value, to_int);
        else if (key == "table") table = to_int(value);
        else if (key == "n_list") n_list = parse_list<int>(value, to_int);
        else if (key == "v_list") v_list = parse_list<double>(value, to_double);
        else if (key == "pop_iters") pop_iters = to_int(value);
        else if (key == "sample_iters_exact") sample_iters_exact = to_int(value);
        else if (key == "sample_iters_over") sample_iters_over = to_int(value);
        else if (key == "r_over") r_over = to_int(value);
        else if (key == "trials") trials = to_int(value);
        else if (key == "runs") runs = to_int(value);
        else if (key == "bench_reps") bench_reps = to_int(value);
        else if (key == "bench_shapes") {
            // n:r:n3 triples, comma separated
            bench_shapes_set = true;
            bench_shapes.clear();
            for (const auto& item : parse_list<std::string>(value, [](const std::string& s) { return s; })) {
                std::stringstream ss(item);
                std::string a, b, c;
                if (!std::getline(ss, a, ':') || !std::getline(ss, b, ':') || !std::getline(ss, c)) {
                    throw InvalidArgument("bench_shapes expects n:r:n3 triples");
                }
                bench_shapes.push_back({to_int(a), to_int(b), to_int(c)});
            }
        } else {
            throw InvalidArgument("unknown config key: " + key);
        }
    } catch (const std::invalid_argument&) {
        throw InvalidArgument("bad value for " + key + ": " + value);
    } catch (const std::out_of_range&) {
        throw InvalidArgument("value out of range for " + key + ": " + value);
    }
}

std::string ExperimentConfig::serialize() const {
    std::ostringstream os;
    os << "command=" << command << "\n";
    os << "n=" << n << "\nn3=" << n3 << "\nr_star=" << r_star << "\nr=" << r << "\n";
    os << "m=" << m << "\nm_rule=" << m_rule << "\nv=" << v << "\n";
    os << "eta=" << eta << "\neta_mode=" << eta_mode << "\nrho=" << rho << "\n";
    os << "max_iters=" << max_iters << "\nstop=" << stop << "\nstop_tol=" << stop_tol << "\n";
    os << "trace_every=" << trace_every << "\nseed=" << seed << "\nseeds=" << seeds << "\n";
    os << "out=" << out_dir << "\nmeasurement=" << measurement << "\nthreads=" << threads << "\n";
    os << "save_tensors=" << (save_tensors ? 1 : 0) << "\nerror_terms=" << (error_terms ? 1 : 0)
       << "\n";
    auto join = [&os](const char* key, const auto& list) {
        if (list.empty()) return;
        os << key << "=";
        for (std::size_t i = 0; i < list.size(); ++i) os << (i ? "," : "") << list[i];
        os << "\n";
    };
    os << "grid_m=" << grid_m << "\ngrid_r=" << grid_r << "\n";
    join("m_list", m_list);
    join("r_star_list", r_star_list);
    os << "table=" << table << "\n";
    join("n_list", n_list);
    join("v_list", v_list);
    os << "pop_iters=" << pop_iters << "\nsample_iters_exact=" << sample_iters_exact
       << "\nsample_iters_over=" << sample_iters_over << "\nr_over=" << r_over << "\n";
    os << "trials=" << trials << "\nruns=" << runs << "\nbench_reps=" << bench_reps << "\n";
    if (!bench_shapes.empty()) {
        os << "bench_shapes=";
        for (std::size_t i = 0; i < bench_shapes.size(); ++i) {
            os << (i ? "," : "") << bench_shapes[i][0] << ":" << bench_shapes[i][1] << ":"
               << bench_shapes[i][2];
        }
        os << "\n";
    }
    return os.str();
}

long ExperimentConfig::resolved_m(int rs) const {
    if (m > 0) return m;
    if (m_rule == "fig") return 10L * (2L * n - rs) * n3;
    if (m_rule == "tables") return 10L * rs * n3 * (2L * n - rs);
    throw InvalidArgument("unknown m_rule: " + m_rule);
}

int ExperimentConfig::resolved_r() const { return r > 0 ? r : r_star; }

MeasureMode ExperimentConfig::measure_mode() const {
    if (measurement == "gaussian") return MeasureMode::plain_gaussian;
    if (measurement == "symmetrized") return MeasureMode::symmetrized;
    throw InvalidArgument("unknown measurement mode: " + measurement);
}

StopRule ExperimentConfig::stop_rule() const {
    if (stop == "rel_change") return StopRule::rel_change;
    if (stop == "rel_error") return StopRule::rel_error;
    if (stop == "iters") return StopRule::iters_only;
    throw InvalidArgument("unknown stop rule: " + stop);
}

FgdConfig ExperimentConfig::fgd(int r_effective) const {
    FgdConfig f;
    f.r = r_effective;
    f.eta = eta;
    f.max_iters = max_iters;
    f.stop = stop_rule();
    f.stop_tol = stop_tol;
    if (eta_mode == "fixed") f.eta_mode = EtaMode::fixed;
    else if (eta_mode == "auto") f.eta_mode = EtaMode::auto_rho;
    else throw InvalidArgument("unknown eta_mode: " + eta_mode);
    f.rho = rho;
    f.trace_every = trace_every;
    f.record_error_terms = error_terms;
    return f;
}

}  // namespace tubal
