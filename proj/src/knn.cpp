#include "gsprop/knn.hpp"

#include <algorithm>
#include <limits>
#include <queue>

namespace gsprop {

KdTree3::KdTree3(std::span<const Eigen::Vector3f> points)
    : points_(points.begin(), points.end()) {
    order_.resize(points_.size());
    for (std::size_t i = 0; i < order_.size(); ++i)
        order_[i] = static_cast<int>(i);
    nodes_.reserve(points_.size());
    if (!points_.empty())
        root_ = build(0, static_cast<int>(points_.size()), 0);
}

int KdTree3::build(int begin, int end, int depth) {
    if (begin >= end)
        return -1;
    const int axis = depth % 3;
    const int mid = begin + (end - begin) / 2;
    std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                     [&](int a, int b) { return points_[a][axis] < points_[b][axis]; });
    const int node_index = static_cast<int>(nodes_.size());
    nodes_.push_back({order_[mid], axis, -1, -1});
    const int left = build(begin, mid, depth + 1);
    const int right = build(mid + 1, end, depth + 1);
    nodes_[node_index].left = left;
    nodes_[node_index].right = right;
    return node_index;
}

std::vector<int> KdTree3::nearest(const Eigen::Vector3f& q, int k, int exclude) const {
    if (k <= 0 || root_ < 0)
        return {};

    // Max-heap of (distance^2, index), worst candidate on top. Index breaks
    // distance ties so results do not depend on traversal order.
    using Entry = std::pair<float, int>;
    auto worse = [](const Entry& a, const Entry& b) {
        return a.first != b.first ? a.first < b.first : a.second < b.second;
    };
    std::priority_queue<Entry, std::vector<Entry>, decltype(worse)> heap(worse);

    auto consider = [&](int point) {
        if (point == exclude)
            return;
        const float d2 = (points_[point] - q).squaredNorm();
        if (static_cast<int>(heap.size()) < k) {
            heap.push({d2, point});
        } else if (Entry cand{d2, point}; worse(cand, heap.top())) {
            heap.pop();
            heap.push(cand);
        }
    };

    // Depth-first with an explicit stack; far subtrees carry the squared
    // distance to their splitting plane so full branches can be pruned.
    std::vector<std::pair<int, float>> to_visit{{root_, 0.0f}};
    while (!to_visit.empty()) {
        auto [node_index, plane_d2] = to_visit.back();
        to_visit.pop_back();
        if (node_index < 0)
            continue;
        if (static_cast<int>(heap.size()) == k && plane_d2 > heap.top().first)
            continue;
        const Node& node = nodes_[node_index];
        consider(node.point);
        const float delta = q[node.axis] - points_[node.point][node.axis];
        const int near_child = delta < 0.0f ? node.left : node.right;
        const int far_child = delta < 0.0f ? node.right : node.left;
        to_visit.push_back({far_child, delta * delta});
        to_visit.push_back({near_child, 0.0f});
    }

    std::vector<int> out(heap.size());
    for (auto it = out.rbegin(); it != out.rend(); ++it) {
        *it = heap.top().second;
        heap.pop();
    }
    return out;
}

float KdTree3::nearest_neighbor_distance(int i) const {
    auto nn = nearest(points_[static_cast<std::size_t>(i)], 1, i);
    if (nn.empty())
        return std::numeric_limits<float>::infinity();
    return (points_[static_cast<std::size_t>(nn[0])] - points_[static_cast<std::size_t>(i)]).norm();
}

} // namespace gsprop
