# wavemaps/models.py
from django.db import models


class RunRecord(models.Model):
    SUBCOMMAND_CHOICES = (
        ("eigen", "Eigenbasis tables"),
        ("transform", "Transform suite"),
        ("evolve", "Free evolution"),
        ("profile", "Profiles"),
        ("construct", "Construction"),
        ("classify", "Classification"),
        ("crosscheck", "FD cross-check"),
    )
    STATUS_CHOICES = (("running", "Running"), ("passed", "Passed"), ("failed", "Failed"))

    created = models.DateTimeField(auto_now_add=True)
    subcommand = models.CharField(max_length=20, choices=SUBCOMMAND_CHOICES)
    config_hash = models.CharField(max_length=64, db_index=True)
    config = models.JSONField()
    status = models.CharField(max_length=10, choices=STATUS_CHOICES, default="running")
    exit_code = models.PositiveSmallIntegerField(default=0)
    output_dir = models.CharField(max_length=500, blank=True)
    manifest = models.JSONField(null=True, blank=True)
    message = models.TextField(blank=True)

    def __str__(self):
        return f"{self.subcommand} {self.config_hash[:12]} ({self.status})"


class CheckResult(models.Model):
    run = models.ForeignKey(RunRecord, on_delete=models.CASCADE, related_name="checks")
    name = models.CharField(max_length=100)
    anchor = models.CharField(max_length=300, blank=True)
    passed = models.BooleanField()
    value = models.JSONField(null=True, blank=True)

    class Meta:
        ordering = ("id",)

    def __str__(self):
        return f"{self.name}: {'PASS' if self.passed else 'FAIL'}"
