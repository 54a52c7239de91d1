import { ClassesScreen } from './classes.js';
import { FusionScreen } from './fusion.js';
import { LabelingScreen } from './labeling.js';
import { StatsScreen } from './stats.js';
import { Candidate, EntityRecord } from './types.js';

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, '&amp;')
    .replace(/</g, '&lt;')
    .replace(/>/g, '&gt;')
    .replace(/"/g, '&quot;');
}

function pct(x: number): string {
  return x.toFixed(3);
}

function entityCard(entity: EntityRecord | undefined, id: string): string {
  if (entity === undefined) {
    return `<div class="entity"><h4>${escapeHtml(id)}</h4><p class="muted">not in loaded dataset</p></div>`;
  }
  const rows = Object.entries(entity.properties)
    .map(([prop, values]) => {
      const rendered = values.map((v) => escapeHtml(v.raw)).join(' | ');
      return `<tr><th>${escapeHtml(prop)}</th><td>${rendered}</td></tr>`;
    })
    .join('');
  return `<div class="entity"><h4>${escapeHtml(entity.id)}</h4><table>${rows}</table></div>`;
}

function perPropertyRows(candidate: Candidate): string {
  return Object.entries(candidate.perProperty)
    .map(([prop, sim]) => `<tr><th>${escapeHtml(prop)}</th><td>${pct(sim)}</td></tr>`)
    .join('');
}

export function renderLabeling(
  screen: LabelingScreen,
  entityOf: (id: string) => EntityRecord | undefined,
): string {
  if (screen.pendingConflict !== null) {
    const { candidate, verdict, message } = screen.pendingConflict;
    return `
      <div class="conflict">
        <p>${escapeHtml(message)}</p>
        <p>Replace the existing label for
          <b>${escapeHtml(candidate.idA)}</b> / <b>${escapeHtml(candidate.idB)}</b>
          with <b>${escapeHtml(verdict)}</b>?</p>
        <button id="supersede-yes">supersede</button>
        <button id="supersede-no">keep existing</button>
      </div>`;
  }
  const candidate = screen.current();
  if (candidate === null) {
    return `<p class="muted">No unlabeled candidates on this page.</p>
      <p>${screen.total} unlabeled in total.</p>`;
  }
  return `
    <p class="muted">${screen.total} unlabeled, highest similarity first.
      Keys: <kbd>y</kbd> same, <kbd>n</kbd> different, <kbd>r</kbd> related.</p>
    <div class="pair">
      ${entityCard(entityOf(candidate.idA), candidate.idA)}
      ${entityCard(entityOf(candidate.idB), candidate.idB)}
    </div>
    <table class="sims">
      <tr><th>overall</th><td>${pct(candidate.sim)}</td></tr>
      ${perPropertyRows(candidate)}
    </table>
    <p class="status">${escapeHtml(screen.status)}</p>`;
}

export function renderClasses(screen: ClassesScreen): string {
  const visible = screen.visibleClasses();
  const blocks = visible
    .map((cls) => {
      const members = cls.map((id) => entityCard(screen.entity(id), id)).join('');
      return `<div class="class" data-size="${cls.length}">
        <h3>${cls.map(escapeHtml).join(' = ')}</h3>
        <div class="members">${members}</div>
      </div>`;
    })
    .join('');
  return `
    <p class="muted">${visible.length} of ${screen.classes.length} classes shown
      (singletons ${screen.includeSingletons ? 'included' : 'hidden'}).</p>
    ${blocks || '<p class="muted">No classes to show.</p>'}`;
}

export function renderFusion(screen: FusionScreen): string {
  const classes = screen.classes();
  if (screen.fusion === null) {
    return '<p class="muted">No fusion run yet. Start one to see the decision log.</p>';
  }
  const blocks = classes
    .map((cls) => {
      const decisionRows = cls.decisions
        .map(
          (d) => `<tr data-fused="${escapeHtml(cls.fusedId)}" data-prop="${escapeHtml(d.property)}">
            <td>${escapeHtml(d.property)}</td>
            <td>${d.inputs.map(escapeHtml).join(' | ')}</td>
            <td>${escapeHtml(d.function)}</td>
            <td>${d.outputs.map(escapeHtml).join(' | ')}</td>
            <td>${escapeHtml(d.rationale)}</td>
          </tr>`,
        )
        .join('');
      const badges = cls.unresolved
        .map((p) => `<span class="badge">unresolved: ${escapeHtml(p)}</span>`)
        .join(' ');
      return `<div class="class">
        <h3>${escapeHtml(cls.fusedId)} <span class="muted">(${cls.memberIds.map(escapeHtml).join(', ')})</span></h3>
        ${badges}
        <table class="decisions">
          <tr><th>property</th><th>inputs</th><th>function</th><th>outputs</th><th>rationale</th></tr>
          ${decisionRows}
        </table>
      </div>`;
    })
    .join('');
  return `
    <p class="muted">${classes.length} fused classes, ${screen.fusion.overrideCount} overrides recorded.</p>
    ${blocks}
    <p class="status">${escapeHtml(screen.status)}</p>`;
}

export function renderStats(screen: StatsScreen): string {
  if (screen.error !== '') {
    return `<p class="error">${escapeHtml(screen.error)}</p>`;
  }
  if (screen.report === null) {
    return '<p class="muted">No evaluation yet.</p>';
  }
  const r = screen.report;
  const sweepRows = screen.sweep
    .map(
      (row) => `<tr><td>${pct(row.threshold)}</td><td>${pct(row.precision)}</td>
        <td>${pct(row.recall)}</td><td>${pct(row.f1)}</td>
        <td><div class="bar" style="width:${Math.round(row.f1 * 100)}px"></div></td></tr>`,
    )
    .join('');
  const featureRows = screen.features
    .map(
      (f) => `<tr><td>${escapeHtml(f.property)}</td><td>${pct(f.fillRate)}</td>
        <td>${pct(f.distinctness)}</td><td>${pct(f.bestThreshold)}</td>
        <td>${pct(f.standaloneF1)}</td><td>${f.discriminative ? 'yes' : 'no'}</td></tr>`,
    )
    .join('');
  return `
    <table class="report">
      <tr><th>tp</th><th>fp</th><th>fn</th><th>unjudged</th>
          <th>precision</th><th>recall</th><th>f1</th></tr>
      <tr><td id="stat-tp">${r.tp}</td><td>${r.fp}</td><td>${r.fn}</td><td>${r.unjudged}</td>
          <td>${pct(r.precision)}</td><td>${pct(r.recall)}</td><td>${pct(r.f1)}</td></tr>
    </table>
    <h3>Threshold sweep</h3>
    <table class="sweep">
      <tr><th>threshold</th><th>precision</th><th>recall</th><th>f1</th><th></th></tr>
      ${sweepRows}
    </table>
    <h3>Feature report</h3>
    <table class="features">
      <tr><th>property</th><th>fill</th><th>distinctness</th>
          <th>best threshold</th><th>standalone f1</th><th>discriminative</th></tr>
      ${featureRows}
    </table>`;
}
