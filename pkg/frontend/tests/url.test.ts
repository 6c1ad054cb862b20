import { describe, expect, it } from "vitest";

import { defaultSession } from "../src/state.js";
import { sessionFromQuery, sessionToQuery } from "../src/url.js";

describe("shareable session URLs", () => {
  it("round-trips the default session", () => {
    const s = defaultSession();
    const back = sessionFromQuery(sessionToQuery(s));
    expect(back).toEqual(s);
  });

  it("round-trips a customized session exactly", () => {
    const s = defaultSession();
    s.anchors = [
      { x: 1.25, y: -3.5, label: "1" },
      { x: 20.961, y: 68.941, label: "2" },
      { x: 0.1, y: 0.2, label: "3" },
      { x: -7, y: 2, label: "4" },
    ];
    s.kind = "linear-cond";
    s.central = 2;
    s.bounds = { x_min: -10, x_max: 25, y_min: -5, y_max: 70 };
    s.res = { nx: 80, ny: 60 };
    s.sigma = 0.55;
    s.trackEnabled = true;
    s.seed = 1234;
    const back = sessionFromQuery(sessionToQuery(s));
    expect(back).toEqual(s);
  });

  it("preserves full float precision through the query string", () => {
    const s = defaultSession();
    s.anchors[0] = { x: 0.1 + 0.2, y: 1 / 3, label: "1" };
    const back = sessionFromQuery(sessionToQuery(s));
    expect(back.anchors[0].x).toBe(0.1 + 0.2);
    expect(back.anchors[0].y).toBe(1 / 3);
  });

  it("falls back to defaults on malformed pieces", () => {
    const s = sessionFromQuery("a=zzz&k=bogus&bb=1,0,0,1&r=-4,0&s=-2&seed=x");
    const d = defaultSession();
    expect(s.anchors).toEqual(d.anchors);
    expect(s.kind).toBe(d.kind);
    expect(s.bounds).toEqual(d.bounds);
    expect(s.res).toEqual(d.res);
    expect(s.sigma).toBe(d.sigma);
    expect(s.seed).toBe(d.seed);
  });

  it("reload from a shared link reproduces the view inputs", () => {
    // the view is a pure function of (session, responses); equal sessions
    // therefore issue identical requests and reproduce the view
    const q =
      "a=0,0;4,0;0,4;-4,0&k=linear-cond&c=0&bb=-6,6,-6,6&r=50,50&s=0.3&t=1&seed=7";
    const a = sessionFromQuery(q);
    const b = sessionFromQuery(sessionToQuery(a));
    expect(b).toEqual(a);
  });
});
