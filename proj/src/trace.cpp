#include "varflow/trace.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace varflow {

EvolutionTrace::EvolutionTrace(std::vector<std::string> extra_names)
    : extra_names_(std::move(extra_names)) {}

void EvolutionTrace::add_row(int step, double time, double energy, double max_velocity,
                             std::vector<double> extras) {
    if (!rows_.empty() && step <= rows_.back().step)
        throw std::invalid_argument("EvolutionTrace: step must be strictly increasing");
    if (!std::isfinite(energy)) throw std::invalid_argument("EvolutionTrace: non-finite energy");
    if (extras.size() != extra_names_.size())
        throw std::invalid_argument("EvolutionTrace: extras must match extra_names");
    rows_.push_back({step, time, energy, max_velocity, std::move(extras)});
}

double EvolutionTrace::extra(const TraceRow& row, const std::string& name) const {
    for (std::size_t i = 0; i < extra_names_.size(); ++i)
        if (extra_names_[i] == name) return row.extras[i];
    throw std::out_of_range("EvolutionTrace: no extra named " + name);
}

namespace {

void append_g9(std::string& out, double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    out += buf;
}

}  // namespace

std::string EvolutionTrace::to_csv() const {
    std::string out = "step,time,energy,max_velocity";
    for (const auto& n : extra_names_) {
        out += ',';
        out += n;
    }
    out += '\n';
    for (const auto& r : rows_) {
        out += std::to_string(r.step);
        out += ',';
        append_g9(out, r.time);
        out += ',';
        append_g9(out, r.energy);
        out += ',';
        append_g9(out, r.max_velocity);
        for (double e : r.extras) {
            out += ',';
            append_g9(out, e);
        }
        out += '\n';
    }
    return out;
}

void EvolutionTrace::write_csv(const std::string& path) const {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("EvolutionTrace: cannot open " + path + " for writing");
    f << to_csv();
}

}  // namespace varflow
