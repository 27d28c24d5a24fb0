/* chart runtime v1.0: executes an interaction manifest against an inline SVG. */
var chartRuntime = (function () {
  "use strict";
  var VERSION = "1.0";

  function el(tag, attrs, text) {
    var node = document.createElement(tag);
    Object.keys(attrs || {}).forEach(function (k) { node.setAttribute(k, attrs[k]); });
    if (text !== undefined) node.textContent = text;
    return node;
  }

  function card(root) {
    var c = root.querySelector(".chart-card");
    if (!c) {
      c = el("div", { "class": "chart-card", role: "status" });
      c.style.cssText = "position:fixed;left:8px;right:8px;bottom:8px;padding:12px;" +
        "background:#fff;border:1px solid #ccc;border-radius:8px;font:14px sans-serif;" +
        "box-shadow:0 2px 8px rgba(0,0,0,.2);display:none;z-index:10";
      root.appendChild(c);
    }
    return c;
  }

  function showCard(root, mark, fields) {
    var c = card(root);
    c.innerHTML = "";
    fields.forEach(function (f) {
      var key = "data-" + f.toLowerCase().replace(/[^a-z0-9-]/g, "-");
      if (!mark.hasAttribute(key)) return;
      var row = el("div", {});
      row.appendChild(el("strong", {}, f + ": "));
      row.appendChild(document.createTextNode(mark.getAttribute(key)));
      c.appendChild(row);
    });
    c.style.display = c.childNodes.length ? "block" : "none";
  }

  function tooltips(root, svg, specs) {
    specs.forEach(function (spec) {
      var layer = svg.getElementById ? svg.getElementById(spec.layer) : svg.querySelector("#" + spec.layer);
      if (!layer) return;
      var marks = layer.querySelectorAll(".mark");
      Array.prototype.forEach.call(marks, function (m) {
        m.style.cursor = "pointer";
        m.addEventListener("click", function (ev) {
          ev.stopPropagation();
          showCard(root, m, spec.fields);
        });
      });
    });
    document.addEventListener("click", function () { card(root).style.display = "none"; });
  }

  function scroll(root, svg, spec) {
    if (spec.axis === "vertical") {
      root.style.overflowY = "auto";
      root.style.maxHeight = spec.viewport_extent + "px";
      return;
    }
    var wrap = el("div", { "class": "chart-scroll" });
    wrap.style.cssText = "overflow-x:auto;-webkit-overflow-scrolling:touch;position:relative";
    svg.parentNode.insertBefore(wrap, svg);
    wrap.appendChild(svg);
    wrap.scrollLeft = spec.initial_offset || 0;
    if (spec.sticky_axis) {
      var axis = svg.querySelector("#" + CSS.escape(spec.sticky_axis));
      if (axis) {
        wrap.addEventListener("scroll", function () {
          axis.setAttribute("transform", "translate(" + wrap.scrollLeft + ",0)");
        });
      }
    }
  }

  function focusSeries(svg, spec, label) {
    var marks = svg.querySelectorAll(".mark");
    Array.prototype.forEach.call(marks, function (m) {
      var s = m.getAttribute("data-series");
      var on = label === spec.default || s === null || s === label;
      m.style.opacity = on ? "" : String(spec.dim_opacity);
    });
  }

  function filters(root, svg, spec) {
    var bar = el("div", { "class": "chart-chips", role: "toolbar" });
    bar.style.cssText = "display:flex;flex-wrap:wrap;gap:4px;padding:4px 16px";
    var chips = [];
    // the default chip resets focus and is not one of the series
    var labels = spec.labels.indexOf(spec.default) < 0 ? [spec.default].concat(spec.labels) : spec.labels;
    var colors = labels === spec.labels ? spec.colors : [null].concat(spec.colors);
    labels.forEach(function (label, i) {
      var chip = el("button", { type: "button", "aria-pressed": String(label === spec.default) }, label);
      chip.style.cssText = "min-height:" + spec.hit_area + "px;padding:0 12px;border-radius:22px;" +
        "border:1px solid #ccc;background:#fff;font:14px sans-serif";
      if (colors[i]) chip.style.borderColor = colors[i];
      chip.addEventListener("click", function () {
        chips.forEach(function (c) { c.setAttribute("aria-pressed", String(c === chip)); });
        focusSeries(svg, spec, label);
      });
      chips.push(chip);
      bar.appendChild(chip);
    });
    root.insertBefore(bar, root.firstChild);
    focusSeries(svg, spec, spec.default);
  }

  function collapsibles(root, svg, specs) {
    specs.forEach(function (spec) {
      var block = svg.querySelector("#" + CSS.escape(spec.block));
      if (!block) return;
      var open = false;
      var original = block.innerHTML;
      var toggle = el("button", { type: "button", "aria-expanded": "false" }, "More");
      toggle.style.cssText = "min-height:" + spec.hit_area + "px;margin:0 16px;font:14px sans-serif";
      var full = el("p", {}, spec.payload);
      full.style.cssText = "display:none;margin:0 16px;font:14px sans-serif";
      toggle.addEventListener("click", function () {
        open = !open;
        toggle.setAttribute("aria-expanded", String(open));
        toggle.textContent = open ? "Less" : "More";
        full.style.display = open ? "block" : "none";
        block.style.display = open ? "none" : "";
      });
      root.appendChild(toggle);
      root.appendChild(full);
      block.setAttribute("data-original", original.length);
    });
  }

  function sliders(root, svg, specs) {
    specs.forEach(function (spec) {
      var lo = Number(spec.domain[0]), hi = Number(spec.domain[1]);
      var input = el("input", { type: "range", min: lo, max: hi, step: "any", "aria-label": spec.label });
      input.style.cssText = "width:calc(100% - 32px);margin:0 16px;min-height:" + spec.hit_area + "px";
      input.value = spec.window ? Number(spec.window[0]) : lo;
      input.addEventListener("input", function () {
        var wrap = root.querySelector(".chart-scroll");
        if (!wrap) return;
        var t = (Number(input.value) - lo) / (hi - lo);
        wrap.scrollLeft = t * (wrap.scrollWidth - wrap.clientWidth);
      });
      root.appendChild(input);
    });
  }

  function init(root, manifest) {
    var svg = root.querySelector("svg");
    if (!svg || !manifest) return;
    if (manifest.tooltips) tooltips(root, svg, manifest.tooltips);
    if (manifest.scroll) scroll(root, svg, manifest.scroll);
    if (manifest.filters) filters(root, svg, manifest.filters);
    if (manifest.collapsibles) collapsibles(root, svg, manifest.collapsibles);
    if (manifest.sliders) sliders(root, svg, manifest.sliders);
  }

  return { init: init, version: VERSION };
})();
