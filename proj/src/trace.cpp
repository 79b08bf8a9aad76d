#include "toolpath/trace.hpp"

namespace toolpath {

void TraceBuffer::add_task(const std::vector<ExecutionTrace>& task_traces) {
    task_offsets_.push_back(traces.size());
    traces.insert(traces.end(), task_traces.begin(), task_traces.end());
    ++task_counter;
}

std::vector<ExecutionTrace> TraceBuffer::recent(long tasks) const {
    if (tasks <= 0 || task_offsets_.empty()) return {};
    size_t first_task = task_offsets_.size() > static_cast<size_t>(tasks)
                            ? task_offsets_.size() - static_cast<size_t>(tasks)
                            : 0;
    size_t begin = task_offsets_[first_task];
    return std::vector<ExecutionTrace>(traces.begin() + static_cast<long>(begin), traces.end());
}

}  // namespace toolpath
