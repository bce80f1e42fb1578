from django.db import models


class SweepModel(models.Model):
    key = models.CharField(max_length=16)  # R, L_A or shape
    values = models.JSONField(default=list)
    config = models.JSONField(default=dict)
    created = models.DateTimeField(auto_now_add=True)

    def __str__(self):
        return f"Sweep over {self.key}: {self.values}"


class GapRunModel(models.Model):
    sweep = models.ForeignKey(SweepModel, related_name='runs', null=True, blank=True, on_delete=models.CASCADE)
    command = models.CharField(max_length=16)
    sweep_value = models.CharField(max_length=32, blank=True, default='')
    config = models.JSONField(default=dict)
    seed = models.IntegerField(default=0)
    bare_h = models.FloatField(null=True)
    final_h = models.FloatField(null=True)
    c_plus_estimate = models.FloatField(null=True)
    iterations = models.IntegerField(default=0)
    converged = models.BooleanField(default=False)
    runtime = models.FloatField(default=0.0)
    trace_path = models.CharField(max_length=512, blank=True, default='')
    error = models.TextField(blank=True, default='')
    created = models.DateTimeField(auto_now_add=True)

    class Meta:
        ordering = ['created', 'id']

    def __str__(self):
        if self.error:
            return f"{self.command} run failed: {self.error[:60]}"
        return f"{self.command} run: bare h={self.bare_h:.6f}, final h={self.final_h:.6f}"
