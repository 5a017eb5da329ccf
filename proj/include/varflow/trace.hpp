#pragma once

// Per-step record of a gradient-descent run: energy, max velocity, and a small
// set of named extras fixed per flow. Serialized as deterministic CSV.

#include <string>
#include <vector>

namespace varflow {

struct TraceRow {
    int step = 0;
    double time = 0.0;
    double energy = 0.0;
    double max_velocity = 0.0;
    std::vector<double> extras;
};

class EvolutionTrace {
public:
    EvolutionTrace() = default;
    explicit EvolutionTrace(std::vector<std::string> extra_names);

    void add_row(int step, double time, double energy, double max_velocity,
                 std::vector<double> extras = {});

    const std::vector<TraceRow>& rows() const { return rows_; }
    const std::vector<std::string>& extra_names() const { return extra_names_; }
    bool empty() const { return rows_.empty(); }
    const TraceRow& back() const { return rows_.back(); }

    /// Value of a named extra in a given row.
    double extra(const TraceRow& row, const std::string& name) const;

    /// Header "step,time,energy,max_velocity,<extras...>", rows with %.9g
    /// formatting; byte-identical output for identical traces.
    void write_csv(const std::string& path) const;
    std::string to_csv() const;

private:
    std::vector<std::string> extra_names_;
    std::vector<TraceRow> rows_;
};

}  // namespace varflow
